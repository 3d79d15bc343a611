#include <benchmark/benchmark.h>

#include "taml/compress.hpp"
#include "taml/nn.hpp"
#include "taml/rng.hpp"

using namespace taml;

static void ForwardBarsCnn(benchmark::State& state) {
    ModelGraph m = make_bars_cnn(1);
    Dataset d = gen_bars(state.range(0), 8, 0.1, 2);
    for (auto _ : state) {
        DenseTensor logits = forward(m, d.images);
        benchmark::DoNotOptimize(logits.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(ForwardBarsCnn)->Arg(32)->Arg(128);

static void TrainEpoch(benchmark::State& state) {
    ModelGraph m = make_bars_cnn(1);
    Dataset d = gen_bars(128, 8, 0.1, 2);
    TrainConfig cfg;
    cfg.epochs = 1;
    for (auto _ : state) {
        TrainResult r = train(m, d, cfg);
        benchmark::DoNotOptimize(r.history.data());
    }
}
BENCHMARK(TrainEpoch);

static void Tucker2Decompose(benchmark::State& state) {
    Rng rng(3);
    DenseTensor kernel({32, 16, 3, 3});
    for (auto& v : kernel.values()) v = rng.normal();
    for (auto _ : state) {
        Tucker2Result r = tucker2_decompose(kernel, state.range(0));
        benchmark::DoNotOptimize(r.rel_error);
    }
}
BENCHMARK(Tucker2Decompose)->Arg(2)->Arg(8);

BENCHMARK_MAIN();
