#include <benchmark/benchmark.h>

#include "taml/rng.hpp"
#include "taml/tt.hpp"

using namespace taml;

namespace {

DenseTensor random_tensor(const Shape& shape, std::uint64_t seed) {
    Rng rng(seed);
    DenseTensor t(shape);
    for (auto& v : t.values()) v = rng.normal();
    return t;
}

TTTensor random_tt(const Shape& modes, Index rank, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<DenseTensor> cores;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const Index rl = k == 0 ? 1 : rank;
        const Index rr = k + 1 == modes.size() ? 1 : rank;
        DenseTensor c({rl, modes[k], rr});
        for (auto& v : c.values()) v = rng.normal();
        cores.push_back(std::move(c));
    }
    return TTTensor(std::move(cores));
}

}  // namespace

static void TtSvdDense(benchmark::State& state) {
    const Index n = state.range(0);
    DenseTensor t = random_tensor(Shape(5, n), 1);
    for (auto _ : state) {
        TTTensor tt = tt_svd(t, 1e-8);
        benchmark::DoNotOptimize(tt.param_count());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(TtSvdDense)->Arg(3)->Arg(4)->Arg(5)->Complexity();

static void TtRound(benchmark::State& state) {
    TTTensor tt = random_tt(Shape(6, 5), state.range(0), 2);
    for (auto _ : state) {
        TTTensor r = tt_round(tt, 1e-8);
        benchmark::DoNotOptimize(r.param_count());
    }
}
BENCHMARK(TtRound)->Arg(4)->Arg(8)->Arg(16);

static void TtEval(benchmark::State& state) {
    TTTensor tt = random_tt(Shape(8, 6), 10, 3);
    Rng rng(4);
    MultiIndex idx(8);
    for (auto _ : state) {
        for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = rng.next_int(6);
        benchmark::DoNotOptimize(tt_eval(tt, idx));
    }
}
BENCHMARK(TtEval);

BENCHMARK_MAIN();
