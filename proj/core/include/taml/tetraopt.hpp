#pragma once

#include <cstdint>
#include <vector>

#include "taml/trace.hpp"

namespace taml {

/// Configuration of the TT-cross optimizer.
struct OptConfig {
    Index rank = 4;       // cross rank r
    int sweeps = 4;       // one sweep = left-to-right plus right-to-left
    Index budget = 0;     // max unique objective evaluations; cache hits are free
    std::uint64_t seed = 0;
    OptMode mode = OptMode::maximize;
    double delta = 0.01;  // maxvol dominance tolerance
    // exp_shift rescales block values as exp(beta*(f - best)) so maxvol
    // concentrates on near-optimal fibers; identity feeds raw values.
    enum class Transform { identity, exp_shift } transform = Transform::exp_shift;
    double beta = 1.0;    // sharpening factor for exp_shift
    int parallelism = 1;  // concurrent evaluations inside one query block
};

/// Nested prefix/suffix index sets of a cross sweep. left[k] holds prefixes
/// of length k (left[0] is the empty-prefix sentinel); right[k] holds
/// suffixes covering modes k..d-1 (right[d] is the empty-suffix sentinel).
struct IndexSets {
    std::vector<std::vector<MultiIndex>> left;
    std::vector<std::vector<MultiIndex>> right;
};

/// Full multi-indices {(l, i_k, s)} for the block at position k, ordered
/// left-major, then mode, then right, so traces reproduce exactly.
std::vector<MultiIndex> query_block(const IndexSets& sets, Index k, Index n_k);

/// TT-cross optimization over a discrete grid: sweep cross-approximation
/// index sets chosen by maxvol over each position's value matrix and track
/// the best point ever evaluated. The reported optimum is always an
/// actually-evaluated point, never a reconstructed estimate.
OptimizationTrace tetraopt_optimize(const Objective& f, const Shape& space_dims, const OptConfig& cfg);

}  // namespace taml
