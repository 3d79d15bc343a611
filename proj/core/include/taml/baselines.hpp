#pragma once

#include <cstdint>
#include <functional>

#include "taml/trace.hpp"

namespace taml {

/// Uniform sampling without replacement (rejection against the evaluation
/// cache) until `budget` unique evaluations; a budget beyond the grid size
/// evaluates the whole grid and stops.
OptimizationTrace random_search(const Objective& f, const Shape& space_dims, Index budget, std::uint64_t seed,
                                OptMode mode = OptMode::maximize, int parallelism = 1);

struct TpeConfig {
    Index budget = 0;
    std::uint64_t seed = 0;
    OptMode mode = OptMode::maximize;
    double gamma = 0.25;   // quantile separating good from bad trials
    int candidates = 24;   // samples drawn from the good model per step
    Index startup = 20;    // random evaluations before the model kicks in
    int parallelism = 1;
};

/// Test hook: called after each model-based step with the per-dimension
/// smoothed categorical distributions of the good set.
using TpeObserver = std::function<void(Index step, const std::vector<std::vector<double>>& good_probs)>;

/// Tree-structured Parzen estimator over discrete dimensions: add-one
/// smoothed categorical good/bad models, candidates scored by likelihood
/// ratio, deterministic tie-breaks.
OptimizationTrace tpe_optimize(const Objective& f, const Shape& space_dims, const TpeConfig& cfg,
                               const TpeObserver& observer = nullptr);

}  // namespace taml
