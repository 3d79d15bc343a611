#pragma once

#include <cstdint>
#include <string>

#include "taml/trace.hpp"

namespace taml {

/// Discretized test objective with its exhaustively verified grid optimum.
struct SyntheticObjective {
    std::string name;
    Shape dims;
    Objective fn;
    MultiIndex best_index;
    double best_value;
    OptMode mode;
};

/// Builds one of ackley | rosenbrock | schwefel | separable_planted on a
/// uniform grid over the function's canonical box. The known optimum is the
/// exhaustive grid optimum for grids up to 10^6 points, otherwise the grid
/// point nearest the analytic minimizer.
SyntheticObjective make_synthetic(const std::string& name, Index dims, Index points_per_dim, std::uint64_t seed);

}  // namespace taml
