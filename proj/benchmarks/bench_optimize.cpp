#include <benchmark/benchmark.h>

#include "taml/baselines.hpp"
#include "taml/maxvol.hpp"
#include "taml/rng.hpp"
#include "taml/tabular.hpp"
#include "taml/tetraopt.hpp"

using namespace taml;

static void Maxvol(benchmark::State& state) {
    Rng rng(1);
    Matrix a(state.range(0), 8);
    for (auto& v : a.values()) v = rng.normal();
    for (auto _ : state) {
        MaxvolResult r = maxvol(a);
        benchmark::DoNotOptimize(r.row_indices.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(Maxvol)->Range(32, 512)->Complexity();

static void TetraOptPlantedTable(benchmark::State& state) {
    PlantedTable table = make_planted_table(6, 5, 7);
    Objective f = table.bench.objective();
    const Shape dims = table.bench.space.grid_shape();
    for (auto _ : state) {
        OptConfig cfg;
        cfg.rank = 4;
        cfg.budget = state.range(0);
        cfg.sweeps = 4;
        OptimizationTrace t = tetraopt_optimize(f, dims, cfg);
        benchmark::DoNotOptimize(t.entries.size());
    }
}
BENCHMARK(TetraOptPlantedTable)->Arg(300)->Arg(1500);

static void TpePlantedTable(benchmark::State& state) {
    PlantedTable table = make_planted_table(6, 5, 7);
    Objective f = table.bench.objective();
    const Shape dims = table.bench.space.grid_shape();
    for (auto _ : state) {
        TpeConfig cfg;
        cfg.budget = state.range(0);
        OptimizationTrace t = tpe_optimize(f, dims, cfg);
        benchmark::DoNotOptimize(t.entries.size());
    }
}
BENCHMARK(TpePlantedTable)->Arg(300)->Arg(1500);

BENCHMARK_MAIN();
