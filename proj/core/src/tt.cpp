#include "taml/tt.hpp"

#include <cmath>
#include <stdexcept>

namespace taml {

namespace {

// Literal row-major view of a 3-way core as a (left x rest) matrix.
Matrix core_as_matrix(const DenseTensor& core, Index rows, Index cols) {
    return Matrix(rows, cols, core.values());
}

}  // namespace

TTTensor::TTTensor(std::vector<DenseTensor> cores) : cores_(std::move(cores)) {
    if (cores_.empty()) throw std::invalid_argument("tt: at least one core required");
    for (std::size_t k = 0; k < cores_.size(); ++k) {
        const auto& c = cores_[k];
        if (c.ndim() != 3) throw std::invalid_argument("tt: cores must be 3-way");
        if (k > 0 && cores_[k - 1].shape()[2] != c.shape()[0])
            throw std::invalid_argument("tt: adjacent core ranks disagree");
    }
    if (cores_.front().shape()[0] != 1 || cores_.back().shape()[2] != 1)
        throw std::invalid_argument("tt: boundary ranks must be 1");
}

Shape TTTensor::mode_sizes() const {
    Shape s;
    s.reserve(cores_.size());
    for (const auto& c : cores_) s.push_back(c.shape()[1]);
    return s;
}

std::vector<Index> TTTensor::ranks() const {
    std::vector<Index> r;
    r.reserve(cores_.size() + 1);
    r.push_back(1);
    for (const auto& c : cores_) r.push_back(c.shape()[2]);
    return r;
}

Index TTTensor::param_count() const {
    Index n = 0;
    for (const auto& c : cores_) n += c.size();
    return n;
}

TTTensor tt_svd(const DenseTensor& t, double tol, Index max_rank) {
    if (tol < 0) throw std::invalid_argument("tt_svd: tol must be >= 0");
    if (max_rank < 1) throw std::invalid_argument("tt_svd: max_rank must be >= 1");
    if (!t.all_finite()) throw std::invalid_argument("tt_svd: non-finite input");
    const Index d = t.ndim();
    if (d < 1) throw std::invalid_argument("tt_svd: tensor must have at least one mode");

    const Shape& modes = t.shape();
    std::vector<DenseTensor> cores;
    cores.reserve(static_cast<std::size_t>(d));

    if (d == 1) {
        cores.push_back(t.reshaped({1, modes[0], 1}));
        return TTTensor(std::move(cores));
    }

    const double delta = tol * fro_norm(t) / std::sqrt(static_cast<double>(d - 1));

    std::vector<double> cur = t.values();
    Index r_prev = 1;
    Index cols_total = t.size();
    for (Index k = 0; k + 1 < d; ++k) {
        const Index n_k = modes[static_cast<std::size_t>(k)];
        const Index rows = r_prev * n_k;
        const Index cols = cols_total / n_k;
        Matrix m(rows, cols, std::move(cur));
        SvdResult svd = svd_truncated_abs(m, delta, max_rank);
        const Index r_k = svd.rank();

        cores.emplace_back(Shape{r_prev, n_k, r_k}, svd.u.values());

        // carry = diag(s) · Vᵀ, the matrix for the next unfolding
        std::vector<double> carry(static_cast<std::size_t>(r_k * cols));
        for (Index i = 0; i < r_k; ++i)
            for (Index c = 0; c < cols; ++c)
                carry[static_cast<std::size_t>(i * cols + c)] = svd.s[static_cast<std::size_t>(i)] * svd.v(c, i);
        cur = std::move(carry);
        r_prev = r_k;
        cols_total = cols;
    }
    cores.emplace_back(Shape{r_prev, modes[static_cast<std::size_t>(d - 1)], 1}, std::move(cur));
    return TTTensor(std::move(cores));
}

double tt_eval(const TTTensor& tt, std::span<const Index> idx) {
    const Index d = tt.ndim();
    if (static_cast<Index>(idx.size()) != d) throw std::invalid_argument("tt_eval: index rank mismatch");
    std::vector<double> v{1.0};
    for (Index k = 0; k < d; ++k) {
        const DenseTensor& c = tt.core(k);
        const Index rl = c.shape()[0], n = c.shape()[1], rr = c.shape()[2];
        const Index i = idx[static_cast<std::size_t>(k)];
        if (i < 0 || i >= n) throw std::out_of_range("tt_eval: index out of range");
        std::vector<double> next(static_cast<std::size_t>(rr), 0.0);
        for (Index a = 0; a < rl; ++a) {
            const double va = v[static_cast<std::size_t>(a)];
            if (va == 0.0) continue;
            const double* slice = c.data() + (a * n + i) * rr;
            for (Index b = 0; b < rr; ++b) next[static_cast<std::size_t>(b)] += va * slice[b];
        }
        v = std::move(next);
    }
    return v[0];
}

DenseTensor tt_to_full(const TTTensor& tt, Index cap) {
    Shape modes = tt.mode_sizes();
    Index numel = 1;
    for (Index n : modes) {
        numel *= n;
        if (numel > cap) throw std::invalid_argument("tt_to_full: element count exceeds cap");
    }
    // Progressive contraction: partial (N x r) times next core unfolding.
    Matrix partial(1, 1, {1.0});
    for (Index k = 0; k < tt.ndim(); ++k) {
        const DenseTensor& c = tt.core(k);
        const Index rl = c.shape()[0], n = c.shape()[1], rr = c.shape()[2];
        Matrix unf = core_as_matrix(c, rl, n * rr);
        Matrix grown = matmul(partial, unf);  // (N x n*rr), row-major
        partial = Matrix(grown.rows() * n, rr, std::move(grown.values()));
    }
    return DenseTensor(std::move(modes), std::move(partial.values()));
}

double tt_dot(const TTTensor& a, const TTTensor& b) {
    if (a.mode_sizes() != b.mode_sizes()) throw std::invalid_argument("tt_dot: mode sizes disagree");
    Matrix v(1, 1, {1.0});
    for (Index k = 0; k < a.ndim(); ++k) {
        const DenseTensor& ca = a.core(k);
        const DenseTensor& cb = b.core(k);
        const Index ral = ca.shape()[0], n = ca.shape()[1], rar = ca.shape()[2];
        const Index rbl = cb.shape()[0], rbr = cb.shape()[2];
        Matrix next(rar, rbr);
        for (Index i = 0; i < n; ++i) {
            Matrix ai(ral, rar);
            for (Index x = 0; x < ral; ++x)
                for (Index y = 0; y < rar; ++y) ai(x, y) = ca[(x * n + i) * rar + y];
            Matrix bi(rbl, rbr);
            for (Index x = 0; x < rbl; ++x)
                for (Index y = 0; y < rbr; ++y) bi(x, y) = cb[(x * n + i) * rbr + y];
            Matrix term = matmul(transpose(ai), matmul(v, bi));
            for (Index x = 0; x < rar; ++x)
                for (Index y = 0; y < rbr; ++y) next(x, y) += term(x, y);
        }
        v = std::move(next);
    }
    return v(0, 0);
}

double tt_norm(const TTTensor& tt) {
    return std::sqrt(std::max(0.0, tt_dot(tt, tt)));
}

TTTensor tt_round(const TTTensor& tt, double tol, Index max_rank) {
    if (tol < 0) throw std::invalid_argument("tt_round: tol must be >= 0");
    if (max_rank < 1) throw std::invalid_argument("tt_round: max_rank must be >= 1");
    const Index d = tt.ndim();
    std::vector<DenseTensor> cores = tt.cores();
    if (d == 1) return TTTensor(std::move(cores));

    // Right-to-left orthogonalization; rank excess shrinks via the LQ inner dim.
    for (Index k = d - 1; k >= 1; --k) {
        DenseTensor& c = cores[static_cast<std::size_t>(k)];
        const Index rl = c.shape()[0], n = c.shape()[1], rr = c.shape()[2];
        LqResult f = lq(core_as_matrix(c, rl, n * rr));
        const Index m = f.qt.rows();
        c = DenseTensor(Shape{m, n, rr}, f.qt.values());

        DenseTensor& prev = cores[static_cast<std::size_t>(k - 1)];
        const Index pl = prev.shape()[0], pn = prev.shape()[1];
        Matrix merged = matmul(Matrix(pl * pn, rl, prev.values()), f.l);
        prev = DenseTensor(Shape{pl, pn, m}, std::move(merged.values()));
    }

    const double norm = fro_norm(cores[0]);  // right-orthogonal tail carries no weight
    const double delta = tol * norm / std::sqrt(static_cast<double>(d - 1));

    // Left-to-right truncated sweep.
    for (Index k = 0; k + 1 < d; ++k) {
        DenseTensor& c = cores[static_cast<std::size_t>(k)];
        const Index rl = c.shape()[0], n = c.shape()[1], rr = c.shape()[2];
        SvdResult svd = svd_truncated_abs(core_as_matrix(c, rl * n, rr), delta, max_rank);
        const Index r_new = svd.rank();
        c = DenseTensor(Shape{rl, n, r_new}, svd.u.values());

        Matrix carry(r_new, rr);
        for (Index i = 0; i < r_new; ++i)
            for (Index j = 0; j < rr; ++j) carry(i, j) = svd.s[static_cast<std::size_t>(i)] * svd.v(j, i);

        DenseTensor& nxt = cores[static_cast<std::size_t>(k + 1)];
        const Index nn = nxt.shape()[1], nr = nxt.shape()[2];
        Matrix merged = matmul(carry, Matrix(rr, nn * nr, nxt.values()));
        nxt = DenseTensor(Shape{r_new, nn, nr}, std::move(merged.values()));
    }
    return TTTensor(std::move(cores));
}

}  // namespace taml
