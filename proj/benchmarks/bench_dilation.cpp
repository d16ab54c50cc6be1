#include <benchmark/benchmark.h>

#include "hardc/model/bench.hpp"

namespace {

hardc::model::DilationBenchConfig config(const benchmark::State& state) {
  hardc::model::DilationBenchConfig cfg;
  cfg.width = static_cast<std::size_t>(state.range(0));
  cfg.levels = static_cast<std::size_t>(state.range(1));
  return cfg;
}

void BM_DilatedStack(benchmark::State& state) {
  const hardc::model::DilationWorkload w(config(state));
  for (auto _ : state) benchmark::DoNotOptimize(w.run_dilated());
  state.counters["rf"] = static_cast<double>(w.dense.dim(2));
}

void BM_DenseEquivalent(benchmark::State& state) {
  const hardc::model::DilationWorkload w(config(state));
  for (auto _ : state) benchmark::DoNotOptimize(w.run_dense());
  state.counters["rf"] = static_cast<double>(w.dense.dim(2));
}

}  // namespace

BENCHMARK(BM_DilatedStack)->Args({8, 3})->Args({5, 2})->Args({4, 4});
BENCHMARK(BM_DenseEquivalent)->Args({8, 3})->Args({5, 2})->Args({4, 4});
