#include "taml/runner.hpp"

#include <algorithm>
#include <stdexcept>

namespace taml {

ExperimentResult run_experiment(const std::vector<Algo>& algos, const Objective& objective, const Shape& space_dims,
                                OptMode mode, Index budget, std::span<const std::uint64_t> seeds, int parallelism) {
    if (seeds.empty()) throw std::invalid_argument("run_experiment: at least one seed required");
    if (algos.empty()) throw std::invalid_argument("run_experiment: at least one algorithm required");

    // Failures inside the objective surface with the failing index attached.
    Objective guarded = [&](const MultiIndex& idx) -> double {
        try {
            return objective(idx);
        } catch (const std::exception& e) {
            throw std::runtime_error("objective failed at index " +
                                     shape_to_string(Shape(idx.begin(), idx.end())) + ": " + e.what());
        }
    };

    ExperimentResult result;
    for (const auto& algo : algos) {
        std::vector<std::vector<double>> best_by_seed;
        for (std::uint64_t seed : seeds) {
            OptimizationTrace trace = algo.run(guarded, space_dims, budget, seed, parallelism);
            trace.mode = mode;
            std::vector<double> best = trace.best_so_far();
            if (!best.empty())
                while (static_cast<Index>(best.size()) < budget) best.push_back(best.back());
            best_by_seed.push_back(std::move(best));
            result.traces.push_back(std::move(trace));
        }

        EnvelopeSeries series;
        series.algo = algo.name;
        const std::size_t len = static_cast<std::size_t>(budget);
        series.mean.assign(len, 0.0);
        series.lo.assign(len, 0.0);
        series.hi.assign(len, 0.0);
        for (std::size_t t = 0; t < len; ++t) {
            double sum = 0.0, lo = 0.0, hi = 0.0;
            for (std::size_t s = 0; s < best_by_seed.size(); ++s) {
                const double v = best_by_seed[s][t];
                sum += v;
                if (s == 0 || v < lo) lo = v;
                if (s == 0 || v > hi) hi = v;
            }
            series.mean[t] = sum / static_cast<double>(best_by_seed.size());
            series.lo[t] = lo;
            series.hi[t] = hi;
        }
        result.series.push_back(std::move(series));
    }
    return result;
}

}  // namespace taml
