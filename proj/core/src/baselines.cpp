#include "taml/baselines.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "taml/evaluator.hpp"
#include "taml/rng.hpp"

namespace taml {

OptimizationTrace random_search(const Objective& f, const Shape& space_dims, Index budget, std::uint64_t seed,
                                OptMode mode, int parallelism) {
    if (budget < 1) throw std::invalid_argument("random_search: budget must be >= 1");
    Evaluator ev(f, space_dims, budget, mode, parallelism);
    Rng rng(seed);
    while (!ev.exhausted()) {
        MultiIndex idx(space_dims.size());
        for (std::size_t j = 0; j < space_dims.size(); ++j) idx[j] = rng.next_int(space_dims[j]);
        if (ev.has(idx)) continue;
        ev.evaluate(std::span<const MultiIndex>(&idx, 1));
    }
    OptimizationTrace trace = std::move(ev.trace());
    trace.algo = "random";
    trace.seed = seed;
    trace.config = nlohmann::json{{"budget", budget}}.dump();
    return trace;
}

namespace {

struct ScoredTrial {
    double value;
    Index ordinal;
    const MultiIndex* index;
};

}  // namespace

OptimizationTrace tpe_optimize(const Objective& f, const Shape& space_dims, const TpeConfig& cfg,
                               const TpeObserver& observer) {
    if (cfg.budget < cfg.startup) throw std::invalid_argument("tpe: budget must be >= startup");
    if (cfg.gamma <= 0.0 || cfg.gamma >= 1.0) throw std::invalid_argument("tpe: gamma must be in (0, 1)");
    if (cfg.candidates < 1) throw std::invalid_argument("tpe: candidates must be >= 1");

    const Index d = static_cast<Index>(space_dims.size());
    Evaluator ev(f, space_dims, cfg.budget, cfg.mode, cfg.parallelism);
    Rng rng(cfg.seed);

    const auto draw_random_unseen = [&]() -> MultiIndex {
        while (true) {
            MultiIndex idx(static_cast<std::size_t>(d));
            for (Index j = 0; j < d; ++j)
                idx[static_cast<std::size_t>(j)] = rng.next_int(space_dims[static_cast<std::size_t>(j)]);
            if (!ev.has(idx)) return idx;
        }
    };

    // Startup phase: plain random sampling without replacement.
    while (ev.evals() < std::min(cfg.startup, ev.grid_size()) && !ev.exhausted()) {
        MultiIndex idx = draw_random_unseen();
        ev.evaluate(std::span<const MultiIndex>(&idx, 1));
    }

    Index step = 0;
    while (!ev.exhausted()) {
        const auto& entries = ev.trace().entries;
        std::vector<ScoredTrial> trials;
        trials.reserve(entries.size());
        for (const auto& e : entries) trials.push_back({e.value, e.ordinal, &e.index});
        // Better value first; earlier ordinal breaks ties deterministically.
        std::sort(trials.begin(), trials.end(), [&](const ScoredTrial& a, const ScoredTrial& b) {
            if (a.value != b.value) return improves(cfg.mode, a.value, b.value);
            return a.ordinal < b.ordinal;
        });
        const Index n = static_cast<Index>(trials.size());
        const Index n_good = std::max<Index>(1, static_cast<Index>(cfg.gamma * static_cast<double>(n)));

        // Per-dimension add-one smoothed categorical models.
        std::vector<std::vector<double>> good_probs(static_cast<std::size_t>(d));
        std::vector<std::vector<double>> bad_probs(static_cast<std::size_t>(d));
        for (Index j = 0; j < d; ++j) {
            const Index nv = space_dims[static_cast<std::size_t>(j)];
            std::vector<double> gc(static_cast<std::size_t>(nv), 1.0);  // add-one smoothing
            std::vector<double> bc(static_cast<std::size_t>(nv), 1.0);
            for (Index t = 0; t < n; ++t) {
                const Index v = (*trials[static_cast<std::size_t>(t)].index)[static_cast<std::size_t>(j)];
                (t < n_good ? gc : bc)[static_cast<std::size_t>(v)] += 1.0;
            }
            const double gsum = std::accumulate(gc.begin(), gc.end(), 0.0);
            const double bsum = std::accumulate(bc.begin(), bc.end(), 0.0);
            for (auto& x : gc) x /= gsum;
            for (auto& x : bc) x /= bsum;
            good_probs[static_cast<std::size_t>(j)] = std::move(gc);
            bad_probs[static_cast<std::size_t>(j)] = std::move(bc);
        }
        if (observer) observer(step, good_probs);

        // Sample candidates from the good model, keep the best unseen one by
        // log likelihood ratio; first sampled wins ties.
        MultiIndex best_cand;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < cfg.candidates; ++c) {
            MultiIndex cand(static_cast<std::size_t>(d));
            for (Index j = 0; j < d; ++j) {
                const auto& probs = good_probs[static_cast<std::size_t>(j)];
                double u = rng.uniform(0.0, 1.0);
                Index pick = static_cast<Index>(probs.size()) - 1;
                double acc = 0.0;
                for (std::size_t v = 0; v < probs.size(); ++v) {
                    acc += probs[v];
                    if (u < acc) {
                        pick = static_cast<Index>(v);
                        break;
                    }
                }
                cand[static_cast<std::size_t>(j)] = pick;
            }
            if (ev.has(cand)) continue;
            double score = 0.0;
            for (Index j = 0; j < d; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                const auto uv = static_cast<std::size_t>(cand[uj]);
                score += std::log(good_probs[uj][uv]) - std::log(bad_probs[uj][uv]);
            }
            if (score > best_score) {
                best_score = score;
                best_cand = std::move(cand);
            }
        }
        if (best_cand.empty()) best_cand = draw_random_unseen();
        ev.evaluate(std::span<const MultiIndex>(&best_cand, 1));
        ++step;
    }

    OptimizationTrace trace = std::move(ev.trace());
    trace.algo = "tpe";
    trace.seed = cfg.seed;
    trace.config = nlohmann::json{{"budget", cfg.budget},
                                  {"gamma", cfg.gamma},
                                  {"candidates", cfg.candidates},
                                  {"startup", cfg.startup}}
                       .dump();
    return trace;
}

}  // namespace taml
