#include "taml/tetraopt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "taml/evaluator.hpp"
#include "taml/linalg.hpp"
#include "taml/maxvol.hpp"
#include "taml/rng.hpp"

namespace taml {

namespace {

MultiIndex concat(const MultiIndex& prefix, Index mid, const MultiIndex& suffix) {
    MultiIndex out;
    out.reserve(prefix.size() + 1 + suffix.size());
    out.insert(out.end(), prefix.begin(), prefix.end());
    out.push_back(mid);
    out.insert(out.end(), suffix.begin(), suffix.end());
    return out;
}

// Up to `want` distinct suffixes over modes [k, d): all of them in ascending
// linear order when the suffix space is small, otherwise seeded rejection
// sampling.
std::vector<MultiIndex> sample_suffixes(const Shape& dims, Index k, Index want, Rng& rng) {
    const Index d = static_cast<Index>(dims.size());
    Index total = 1;
    for (Index j = k; j < d; ++j) {
        total *= dims[static_cast<std::size_t>(j)];
        if (total > want) break;  // only need to know whether total <= want
    }
    std::vector<MultiIndex> out;
    if (total <= want) {
        MultiIndex cur(static_cast<std::size_t>(d - k), 0);
        while (true) {
            out.push_back(cur);
            Index j = d - k - 1;
            for (; j >= 0; --j) {
                auto uj = static_cast<std::size_t>(j);
                if (++cur[uj] < dims[static_cast<std::size_t>(k + j)]) break;
                cur[uj] = 0;
            }
            if (j < 0) break;
        }
        return out;
    }
    std::set<MultiIndex> seen;
    while (static_cast<Index>(out.size()) < want) {
        MultiIndex cand(static_cast<std::size_t>(d - k));
        for (Index j = k; j < d; ++j)
            cand[static_cast<std::size_t>(j - k)] = rng.next_int(dims[static_cast<std::size_t>(j)]);
        if (seen.insert(cand).second) out.push_back(std::move(cand));
    }
    return out;
}

// Orthonormal column basis of the value matrix for maxvol; QR for tall
// blocks, SVD basis when the block is wider than it is tall.
Matrix orthonormal_basis(const Matrix& v, Index q) {
    if (v.rows() >= v.cols()) {
        Matrix thin = qr(v).q;
        if (thin.cols() == q) return thin;
        Matrix cut(thin.rows(), q);
        for (Index r = 0; r < thin.rows(); ++r)
            for (Index c = 0; c < q; ++c) cut(r, c) = thin(r, c);
        return cut;
    }
    SvdResult svd = svd_truncated_abs(v, 0.0, q);
    if (svd.u.cols() == q) return svd.u;
    Matrix cut(svd.u.rows(), q);
    for (Index r = 0; r < svd.u.rows(); ++r)
        for (Index c = 0; c < std::min(q, svd.u.cols()); ++c) cut(r, c) = svd.u(r, c);
    return cut;
}

}  // namespace

std::vector<MultiIndex> query_block(const IndexSets& sets, Index k, Index n_k) {
    const auto& left = sets.left[static_cast<std::size_t>(k)];
    const auto& right = sets.right[static_cast<std::size_t>(k + 1)];
    std::vector<MultiIndex> block;
    block.reserve(left.size() * static_cast<std::size_t>(n_k) * right.size());
    for (const auto& l : left)
        for (Index i = 0; i < n_k; ++i)
            for (const auto& s : right) block.push_back(concat(l, i, s));
    return block;
}

OptimizationTrace tetraopt_optimize(const Objective& f, const Shape& space_dims, const OptConfig& cfg) {
    const Index d = static_cast<Index>(space_dims.size());
    if (d < 1) throw std::invalid_argument("tetraopt: empty search space");
    for (Index n : space_dims)
        if (n < 1) throw std::invalid_argument("tetraopt: every mode size must be >= 1");
    if (cfg.rank < 1) throw std::invalid_argument("tetraopt: rank must be >= 1");
    if (cfg.sweeps < 1) throw std::invalid_argument("tetraopt: sweeps must be >= 1");

    Rng rng(cfg.seed);
    IndexSets sets;
    sets.left.resize(static_cast<std::size_t>(d) + 1);
    sets.right.resize(static_cast<std::size_t>(d) + 1);
    sets.left[0] = {MultiIndex{}};
    sets.right[static_cast<std::size_t>(d)] = {MultiIndex{}};
    for (Index k = 1; k < d; ++k)
        sets.right[static_cast<std::size_t>(k)] = sample_suffixes(space_dims, k, cfg.rank, rng);

    const Index first_block = space_dims[0] * static_cast<Index>(sets.right[1].size());
    if (cfg.budget < first_block)
        throw std::invalid_argument("tetraopt: budget smaller than one core block (" + std::to_string(first_block) +
                                    " evaluations needed)");

    Evaluator ev(f, space_dims, cfg.budget, cfg.mode, cfg.parallelism);

    const auto transform = [&](double v) -> double {
        if (cfg.transform == OptConfig::Transform::identity) return v;
        const double best = ev.has_best() ? ev.best_value() : 0.0;
        const double arg = cfg.mode == OptMode::maximize ? v - best : best - v;
        return std::exp(cfg.beta * arg);
    };

    // maxvol row selection -> refreshed index set, with a dedup/backfill
    // guard for degenerate value matrices.
    const auto select = [&](const Matrix& values, Index q, auto&& make_index) -> std::vector<MultiIndex> {
        Matrix basis = orthonormal_basis(values, q);
        MaxvolResult mv = maxvol(basis, cfg.delta);
        std::vector<MultiIndex> chosen;
        std::set<MultiIndex> seen;
        for (Index row : mv.row_indices) {
            MultiIndex idx = make_index(row);
            if (seen.insert(idx).second) chosen.push_back(std::move(idx));
        }
        while (static_cast<Index>(chosen.size()) < q) {
            MultiIndex idx = make_index(rng.next_int(values.rows()));
            if (seen.insert(idx).second) chosen.push_back(std::move(idx));
        }
        return chosen;
    };

    bool out_of_budget = false;
    for (int sweep = 0; sweep < cfg.sweeps && !out_of_budget && !ev.exhausted(); ++sweep) {
        // Left-to-right half sweep.
        for (Index k = 0; k < d; ++k) {
            const Index n_k = space_dims[static_cast<std::size_t>(k)];
            const auto& left = sets.left[static_cast<std::size_t>(k)];
            const auto& right = sets.right[static_cast<std::size_t>(k + 1)];
            std::vector<MultiIndex> block = query_block(sets, k, n_k);
            if (!ev.evaluate(block)) {
                out_of_budget = true;
                break;
            }
            if (k + 1 < d) {
                const Index rows = static_cast<Index>(left.size()) * n_k;
                const Index cols = static_cast<Index>(right.size());
                Matrix values(rows, cols);
                std::size_t at = 0;
                for (Index li = 0; li < static_cast<Index>(left.size()); ++li)
                    for (Index i = 0; i < n_k; ++i)
                        for (Index si = 0; si < cols; ++si)
                            values(li * n_k + i, si) = transform(ev.value(block[at++]));
                const Index q = std::min(rows, cols);
                sets.left[static_cast<std::size_t>(k + 1)] = select(values, q, [&](Index row) {
                    MultiIndex idx = left[static_cast<std::size_t>(row / n_k)];
                    idx.push_back(row % n_k);
                    return idx;
                });
            }
            if (ev.exhausted()) break;
        }

        // Right-to-left half sweep.
        for (Index k = d - 1; k >= 0 && !out_of_budget && !ev.exhausted(); --k) {
            const Index n_k = space_dims[static_cast<std::size_t>(k)];
            const auto& left = sets.left[static_cast<std::size_t>(k)];
            const auto& right = sets.right[static_cast<std::size_t>(k + 1)];
            std::vector<MultiIndex> block = query_block(sets, k, n_k);
            if (!ev.evaluate(block)) {
                out_of_budget = true;
                break;
            }
            if (k > 0) {
                const Index rcount = static_cast<Index>(right.size());
                const Index rows = n_k * rcount;
                const Index cols = static_cast<Index>(left.size());
                Matrix values(rows, cols);
                std::size_t at = 0;
                for (Index li = 0; li < cols; ++li)
                    for (Index i = 0; i < n_k; ++i)
                        for (Index si = 0; si < rcount; ++si)
                            values(i * rcount + si, li) = transform(ev.value(block[at++]));
                const Index q = std::min(rows, cols);
                sets.right[static_cast<std::size_t>(k)] = select(values, q, [&](Index row) {
                    MultiIndex idx{row / rcount};
                    const auto& s = right[static_cast<std::size_t>(row % rcount)];
                    idx.insert(idx.end(), s.begin(), s.end());
                    return idx;
                });
            }
        }
    }

    OptimizationTrace trace = std::move(ev.trace());
    trace.algo = "tetraopt";
    trace.seed = cfg.seed;
    nlohmann::json cfg_json{{"rank", cfg.rank},
                            {"sweeps", cfg.sweeps},
                            {"budget", cfg.budget},
                            {"delta", cfg.delta},
                            {"mode", cfg.mode == OptMode::maximize ? "maximize" : "minimize"},
                            {"transform", cfg.transform == OptConfig::Transform::identity ? "identity" : "exp_shift"},
                            {"beta", cfg.beta},
                            {"parallelism", cfg.parallelism}};
    trace.config = cfg_json.dump();
    return trace;
}

}  // namespace taml
