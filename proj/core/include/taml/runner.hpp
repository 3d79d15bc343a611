#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "taml/trace.hpp"

namespace taml {

/// A named optimizer ready to run at a given budget/seed/parallelism.
struct Algo {
    std::string name;
    std::function<OptimizationTrace(const Objective&, const Shape&, Index budget, std::uint64_t seed, int parallelism)>
        run;
};

/// Per-algorithm best-so-far envelope across seeds, aligned on evaluation
/// ordinals 1..budget. Traces shorter than the budget (exhausted grids)
/// extend with their final best.
struct EnvelopeSeries {
    std::string algo;
    std::vector<double> mean;
    std::vector<double> lo;
    std::vector<double> hi;
};

struct ExperimentResult {
    std::vector<OptimizationTrace> traces;  // all (algo, seed) runs in order
    std::vector<EnvelopeSeries> series;     // one per algorithm
};

/// Runs every algorithm on every seed; batch evaluations inside each run may
/// use up to `parallelism` worker threads without changing any trace.
ExperimentResult run_experiment(const std::vector<Algo>& algos, const Objective& objective, const Shape& space_dims,
                                OptMode mode, Index budget, std::span<const std::uint64_t> seeds, int parallelism = 1);

}  // namespace taml
