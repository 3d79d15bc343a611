#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>

#include "taml/baselines.hpp"
#include "taml/csv.hpp"
#include "taml/runner.hpp"
#include "taml/synthetic.hpp"
#include "taml/tabular.hpp"
#include "taml/tetraopt.hpp"

using namespace taml;

TEST_CASE("ackley on an odd grid is minimized at the centered zero point") {
    SyntheticObjective s = make_synthetic("ackley", 2, 11, 0);
    CHECK(s.mode == OptMode::minimize);
    CHECK(s.best_index == MultiIndex{5, 5});
    CHECK(s.best_value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.fn({5, 5}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rosenbrock's declared optimum matches an independent exhaustive scan") {
    SyntheticObjective s = make_synthetic("rosenbrock", 2, 9, 0);
    double best = 1e300;
    MultiIndex arg;
    for (Index i = 0; i < 9; ++i)
        for (Index j = 0; j < 9; ++j) {
            const double v = s.fn({i, j});
            if (v < best) {
                best = v;
                arg = {i, j};
            }
        }
    CHECK(s.best_value == doctest::Approx(best));
    CHECK(s.best_index == arg);
}

TEST_CASE("schwefel optimum matches its exhaustive grid scan") {
    SyntheticObjective s = make_synthetic("schwefel", 2, 21, 0);
    double best = 1e300;
    for (Index i = 0; i < 21; ++i)
        for (Index j = 0; j < 21; ++j) best = std::min(best, s.fn({i, j}));
    CHECK(s.best_value == doctest::Approx(best));
}

TEST_CASE("separable_planted optimum equals the sum of per-dimension maxima") {
    SyntheticObjective s = make_synthetic("separable_planted", 3, 5, 42);
    CHECK(s.mode == OptMode::maximize);
    double best = -1e300;
    MultiIndex arg;
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 5; ++j)
            for (Index k = 0; k < 5; ++k) {
                const double v = s.fn({i, j, k});
                if (v > best) {
                    best = v;
                    arg = {i, j, k};
                }
            }
    CHECK(s.best_value == doctest::Approx(best).epsilon(1e-12));
    CHECK(s.best_index == arg);
    CHECK_THROWS_AS((void)make_synthetic("mystery", 2, 5, 0), std::invalid_argument);
}

TEST_CASE("toy 2x2 table lookups and argmax") {
    SearchSpace space({CategoricalDim{{"a", "b"}}, CategoricalDim{{"x", "y"}}});
    TabularBenchmark bench(space, DenseTensor({2, 2}, {10, 20, 30, 40}), "toy", "acc");
    Objective f = bench.objective();
    CHECK(f({1, 1}) == 40);
    CHECK(f({0, 1}) == 20);
    CHECK(bench.max_value() == 40);
    CHECK(bench.argmax() == MultiIndex{1, 1});
}

TEST_CASE("generated planted tables place their optimum at the recorded index") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        PlantedTable p = make_planted_table(6, 5, seed);
        CHECK(p.bench.space.grid_size() == 15625);
        CHECK(p.bench.argmax() == p.planted);
        const Objective f = p.bench.objective();
        CHECK(f(p.planted) == p.bench.max_value());
    }
}

TEST_CASE("incomplete or out-of-range tables are rejected with counts") {
    SearchSpace space({CategoricalDim{{"a", "b"}}, CategoricalDim{{"x", "y"}}});
    CHECK_THROWS_WITH_AS(check_table(space, DenseTensor({2, 1}, {1, 2})),
                         doctest::Contains("2 entries missing"), std::invalid_argument);

    DenseTensor holes({2, 2});
    holes.values()[1] = std::nan("");
    holes.values()[3] = std::nan("");
    CHECK_THROWS_WITH_AS(check_table(space, holes), doctest::Contains("2 missing grid entries"),
                         std::invalid_argument);

    CHECK_THROWS_AS(check_table(space, DenseTensor({2, 2}, {1, 2, 3, 101})), std::invalid_argument);
}

TEST_CASE("random search exhausts the grid when the budget allows") {
    PlantedTable p = make_planted_table(3, 3, 5);
    Objective f = p.bench.objective();
    OptimizationTrace t = random_search(f, {3, 3, 3}, 1000, 7);
    CHECK(t.entries.size() == 27);  // grid size, then stop
    REQUIRE(t.best() != nullptr);
    CHECK(t.best()->value == p.bench.max_value());

    OptimizationTrace again = random_search(f, {3, 3, 3}, 1000, 7);
    REQUIRE(again.entries.size() == t.entries.size());
    for (std::size_t i = 0; i < t.entries.size(); ++i) CHECK(again.entries[i].index == t.entries[i].index);

    std::set<MultiIndex> unique;
    for (const auto& e : t.entries) unique.insert(e.index);
    CHECK(unique.size() == t.entries.size());
}

TEST_CASE("tpe behaves like random search when every value ties") {
    Objective f = [](const MultiIndex&) { return 1.0; };
    TpeConfig cfg;
    cfg.budget = 30;
    cfg.startup = 10;
    cfg.seed = 3;
    OptimizationTrace t = tpe_optimize(f, {4, 4, 4}, cfg);
    CHECK(t.entries.size() == 30);
    std::set<MultiIndex> unique;
    for (const auto& e : t.entries) unique.insert(e.index);
    CHECK(unique.size() == 30);

    OptimizationTrace again = tpe_optimize(f, {4, 4, 4}, cfg);
    for (std::size_t i = 0; i < t.entries.size(); ++i) CHECK(again.entries[i].index == t.entries[i].index);
}

TEST_CASE("tpe's good model concentrates on a dominant categorical value") {
    // value 2 of dimension 0 dominates everything else
    Objective f = [](const MultiIndex& idx) { return idx[0] == 2 ? 10.0 : 1.0; };
    std::vector<double> mass_over_steps;
    TpeObserver obs = [&](Index, const std::vector<std::vector<double>>& good_probs) {
        mass_over_steps.push_back(good_probs[0][2]);
    };
    TpeConfig cfg;
    cfg.budget = 60;
    cfg.startup = 15;
    cfg.seed = 11;
    tpe_optimize(f, {5, 4, 4}, cfg, obs);
    REQUIRE(mass_over_steps.size() > 10);
    CHECK(mass_over_steps.back() > mass_over_steps.front());
    CHECK(mass_over_steps.back() >= 0.5);
}

TEST_CASE("tpe stops early when the grid is exhausted") {
    Objective f = [](const MultiIndex& idx) { return static_cast<double>(idx[0]); };
    TpeConfig cfg;
    cfg.budget = 100;
    cfg.startup = 5;
    OptimizationTrace t = tpe_optimize(f, {3, 3}, cfg);
    CHECK(t.entries.size() == 9);
}

TEST_CASE("tpe finds planted optima at least as often as random search") {
    int tpe_found = 0, random_found = 0;
    for (int i = 0; i < 20; ++i) {
        PlantedTable p = make_planted_table(3, 4, 500 + static_cast<std::uint64_t>(i));
        Objective f = p.bench.objective();
        const double target = p.bench.max_value();
        TpeConfig cfg;
        cfg.budget = 40;
        cfg.startup = 20;
        cfg.seed = static_cast<std::uint64_t>(i);
        OptimizationTrace tt = tpe_optimize(f, {4, 4, 4}, cfg);
        if (tt.best() && tt.best()->value == target) ++tpe_found;
        OptimizationTrace rt = random_search(f, {4, 4, 4}, 40, static_cast<std::uint64_t>(i));
        if (rt.best() && rt.best()->value == target) ++random_found;
    }
    CHECK(tpe_found >= random_found);
}

namespace {

std::vector<Algo> standard_algos(OptMode mode, Index rank, int sweeps) {
    std::vector<Algo> algos;
    algos.push_back(Algo{"tetraopt", [=](const Objective& f, const Shape& dims, Index budget, std::uint64_t seed,
                                         int parallelism) {
                             OptConfig cfg;
                             cfg.rank = rank;
                             cfg.sweeps = sweeps;
                             cfg.budget = budget;
                             cfg.seed = seed;
                             cfg.mode = mode;
                             cfg.parallelism = parallelism;
                             return tetraopt_optimize(f, dims, cfg);
                         }});
    algos.push_back(Algo{"random", [=](const Objective& f, const Shape& dims, Index budget, std::uint64_t seed,
                                       int parallelism) { return random_search(f, dims, budget, seed, mode, parallelism); }});
    algos.push_back(Algo{"tpe", [=](const Objective& f, const Shape& dims, Index budget, std::uint64_t seed,
                                    int parallelism) {
                             TpeConfig cfg;
                             cfg.budget = budget;
                             cfg.seed = seed;
                             cfg.mode = mode;
                             cfg.parallelism = parallelism;
                             return tpe_optimize(f, dims, cfg);
                         }});
    return algos;
}

}  // namespace

TEST_CASE("a single algo and seed summarizes to its own best-so-far") {
    PlantedTable p = make_planted_table(4, 4, 21);
    const std::uint64_t seeds[] = {3};
    auto algos = standard_algos(OptMode::maximize, 3, 2);
    algos.resize(1);
    ExperimentResult r = run_experiment(algos, p.bench.objective(), p.bench.space.grid_shape(), OptMode::maximize,
                                        60, seeds, 1);
    REQUIRE(r.traces.size() == 1);
    REQUIRE(r.series.size() == 1);
    std::vector<double> best = r.traces[0].best_so_far();
    while (static_cast<Index>(best.size()) < 60) best.push_back(best.back());
    CHECK(r.series[0].mean == best);
    CHECK(r.series[0].lo == best);
    CHECK(r.series[0].hi == best);
}

TEST_CASE("parallel dispatch never changes a trace") {
    PlantedTable p = make_planted_table(6, 5, 33);
    Objective f = p.bench.objective();
    const std::uint64_t seeds[] = {1, 2};
    const auto algos = standard_algos(OptMode::maximize, 4, 2);
    ExperimentResult seq = run_experiment(algos, f, p.bench.space.grid_shape(), OptMode::maximize, 300, seeds, 1);
    ExperimentResult par = run_experiment(algos, f, p.bench.space.grid_shape(), OptMode::maximize, 300, seeds, 8);
    REQUIRE(seq.traces.size() == par.traces.size());
    for (std::size_t i = 0; i < seq.traces.size(); ++i) {
        REQUIRE(seq.traces[i].entries.size() == par.traces[i].entries.size());
        for (std::size_t j = 0; j < seq.traces[i].entries.size(); ++j) {
            CHECK(seq.traces[i].entries[j].index == par.traces[i].entries[j].index);
            CHECK(seq.traces[i].entries[j].value == par.traces[i].entries[j].value);
        }
    }
}

TEST_CASE("three algorithms emit exactly 3 x budget CSV rows with the pinned schema") {
    PlantedTable p = make_planted_table(6, 5, 44);
    const std::uint64_t seeds[] = {9};
    ExperimentResult r = run_experiment(standard_algos(OptMode::maximize, 4, 4), p.bench.objective(),
                                        p.bench.space.grid_shape(), OptMode::maximize, 100, seeds, 1);
    const std::string csv = traces_to_csv(r.traces);
    CHECK(csv.rfind("algo,seed,eval_ordinal,value,best_so_far\n", 0) == 0);
    const auto rows = parse_traces_csv(csv);
    CHECK(rows.size() == 300);
    for (const auto& row : rows) CHECK((row.algo == "tetraopt" || row.algo == "random" || row.algo == "tpe"));
}

TEST_CASE("objective failures surface with the failing index") {
    Objective f = [](const MultiIndex& idx) -> double {
        if (idx[0] == 1) throw std::domain_error("boom");
        return 1.0;
    };
    const std::uint64_t seeds[] = {0};
    std::vector<Algo> algos{{"random", [](const Objective& g, const Shape& dims, Index budget, std::uint64_t seed,
                                          int) { return random_search(g, dims, budget, seed); }}};
    CHECK_THROWS_WITH_AS(run_experiment(algos, f, {3, 3}, OptMode::maximize, 9, seeds, 1),
                         doctest::Contains("objective failed at index"), std::runtime_error);
}

TEST_CASE("evaluation counts equal distinct evaluated indices for every algorithm") {
    PlantedTable p = make_planted_table(4, 3, 55);
    Objective table = p.bench.objective();
    for (const auto& algo : standard_algos(OptMode::maximize, 2, 2)) {
        std::atomic<int> calls{0};
        std::set<MultiIndex> seen;
        std::mutex mu;
        Objective counting = [&](const MultiIndex& idx) {
            ++calls;
            {
                std::lock_guard<std::mutex> lk(mu);
                seen.insert(idx);
            }
            return table(idx);
        };
        OptimizationTrace t = algo.run(counting, p.bench.space.grid_shape(), 50, 1, 1);
        CHECK(calls.load() == static_cast<int>(t.entries.size()));
        CHECK(seen.size() == t.entries.size());
    }
}
