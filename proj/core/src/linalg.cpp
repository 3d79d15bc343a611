#include "taml/linalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace taml {

namespace {

using EMatrix = Eigen::MatrixXd;

EMatrix to_eigen(const Matrix& m) {
    EMatrix e(m.rows(), m.cols());
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
    return e;
}

Matrix from_eigen(const EMatrix& e) {
    Matrix m(e.rows(), e.cols());
    for (Index r = 0; r < e.rows(); ++r)
        for (Index c = 0; c < e.cols(); ++c) m(r, c) = e(r, c);
    return m;
}

void require_finite(const Matrix& m, const char* what) {
    for (double v : m.values())
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

SvdResult truncate_svd(const EMatrix& u, const Eigen::VectorXd& s, const EMatrix& v, double abs_tol,
                       Index max_rank) {
    const Index n = static_cast<Index>(s.size());
    // Suffix energy: tail2[r] = sum_{i>=r} s_i^2.
    std::vector<double> tail2(static_cast<std::size_t>(n) + 1, 0.0);
    for (Index i = n - 1; i >= 0; --i)
        tail2[static_cast<std::size_t>(i)] = tail2[static_cast<std::size_t>(i) + 1] + s(i) * s(i);

    Index r = n;
    for (Index cand = 0; cand <= n; ++cand) {
        if (std::sqrt(tail2[static_cast<std::size_t>(cand)]) <= abs_tol) {
            r = cand;
            break;
        }
    }
    if (r < 1) r = 1;
    if (r > max_rank) r = max_rank;
    if (r > n) r = n;

    SvdResult out{Matrix(u.rows(), r), std::vector<double>(static_cast<std::size_t>(r)), Matrix(v.rows(), r)};
    for (Index i = 0; i < r; ++i) out.s[static_cast<std::size_t>(i)] = s(i);
    for (Index row = 0; row < u.rows(); ++row)
        for (Index c = 0; c < r; ++c) out.u(row, c) = u(row, c);
    for (Index row = 0; row < v.rows(); ++row)
        for (Index c = 0; c < r; ++c) out.v(row, c) = v(row, c);
    return out;
}

}  // namespace

SvdResult svd_truncated_abs(const Matrix& m, double abs_tol, Index max_rank) {
    require_finite(m, "svd");
    if (max_rank < 1) throw std::invalid_argument("svd: max_rank must be >= 1");
    EMatrix e = to_eigen(m);
    Eigen::JacobiSVD<EMatrix> svd(e, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return truncate_svd(svd.matrixU(), svd.singularValues(), svd.matrixV(), abs_tol, max_rank);
}

SvdResult svd_truncated(const Matrix& m, double tol, Index max_rank) {
    if (tol < 0) throw std::invalid_argument("svd: tol must be >= 0");
    return svd_truncated_abs(m, tol * fro_norm(m), max_rank);
}

QrResult qr(const Matrix& m) {
    require_finite(m, "qr");
    if (m.rows() < m.cols()) throw std::invalid_argument("qr requires rows >= cols");
    EMatrix e = to_eigen(m);
    Eigen::HouseholderQR<EMatrix> dec(e);
    EMatrix thin_q = dec.householderQ() * EMatrix::Identity(m.rows(), m.cols());
    EMatrix full_r = dec.matrixQR().triangularView<Eigen::Upper>();
    EMatrix thin_r = full_r.topRows(m.cols());
    return QrResult{from_eigen(thin_q), from_eigen(thin_r)};
}

LqResult lq(const Matrix& m) {
    require_finite(m, "lq");
    EMatrix e = to_eigen(m).transpose();  // (cols x rows)
    const Index k = std::min(m.rows(), m.cols());
    Eigen::HouseholderQR<EMatrix> dec(e);
    EMatrix thin_q = dec.householderQ() * EMatrix::Identity(e.rows(), k);
    EMatrix full_r = dec.matrixQR().triangularView<Eigen::Upper>();
    EMatrix thin_r = full_r.topRows(k);
    // m = (Q R)^T = R^T Q^T: l = R^T (rows x k), qt = Q^T (k x cols)
    return LqResult{from_eigen(thin_r.transpose()), from_eigen(thin_q.transpose())};
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions disagree");
    EMatrix c = to_eigen(a) * to_eigen(b);
    return from_eigen(c);
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
    return t;
}

double fro_norm(const Matrix& m) {
    double s = 0;
    for (double v : m.values()) s += v * v;
    return std::sqrt(s);
}

double fro_norm(const DenseTensor& t) {
    double s = 0;
    for (double v : t.values()) s += v * v;
    return std::sqrt(s);
}

std::pair<double, double> singular_value_range(const Matrix& m) {
    EMatrix e = to_eigen(m);
    Eigen::JacobiSVD<EMatrix> svd(e);
    const auto& s = svd.singularValues();
    return {s(s.size() - 1), s(0)};
}

Matrix solve_right(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols()) throw std::invalid_argument("solve_right: a must be square");
    if (b.cols() != a.rows()) throw std::invalid_argument("solve_right: dimension mismatch");
    // x a = b  <=>  a^T x^T = b^T
    EMatrix at = to_eigen(a).transpose();
    EMatrix bt = to_eigen(b).transpose();
    EMatrix xt = at.partialPivLu().solve(bt);
    return from_eigen(xt.transpose());
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    double d = 0;
    for (Index i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[static_cast<std::size_t>(i)] - b.values()[static_cast<std::size_t>(i)]));
    return d;
}

}  // namespace taml
