// Serial reference ensemble against the OpenMP one on the clean-noise reference experiment.
#include <benchmark/benchmark.h>

#include "ttssa/ensemble.hpp"

namespace {

ttssa::Experiment experiment() {
    ttssa::RunConfig cfg;
    cfg.horizon = 20000;
    cfg.stride = 100;
    cfg.noise.m0_slow = cfg.noise.m0_fast = 0.1;
    return ttssa::prepare(cfg);
}

void BM_EnsembleSerial(benchmark::State& state) {
    const auto ex = experiment();
    const auto runs = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(ttssa::run_ensemble_serial(ex, runs));
    state.SetItemsProcessed(state.iterations() * state.range(0) * ex.config.horizon);
}

void BM_EnsembleOpenMP(benchmark::State& state) {
    const auto ex = experiment();
    const auto runs = static_cast<std::size_t>(state.range(0));
    const int workers = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(ttssa::run_ensemble(ex, runs, workers));
    state.SetItemsProcessed(state.iterations() * state.range(0) * ex.config.horizon);
}

}  // namespace

BENCHMARK(BM_EnsembleSerial)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EnsembleOpenMP)->Args({16, 1})->Args({16, 2})->Args({16, 4})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
