#include "hardc/model/bench.hpp"

#include <chrono>
#include <limits>
#include <random>

#include "hardc/model/hardc.hpp"
#include "hardc/nn/kernels.hpp"

namespace hardc::model {

using nn::Tensor;

namespace {

Tensor uniform(nn::Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = d(rng);
  return t;
}

}  // namespace

DilationWorkload::DilationWorkload(const DilationBenchConfig& cfg) {
  ModelSpec spec;
  spec.kernel_width = cfg.width;
  spec.conv_blocks = cfg.levels;
  spec.validate();
  dilations = dilation_schedule(spec);
  std::mt19937_64 rng(cfg.seed);
  x = uniform({1, cfg.steps, cfg.channels}, rng);
  for (std::size_t l = 0; l < cfg.levels; ++l) stack.push_back(uniform({cfg.channels, cfg.channels, cfg.width}, rng));
  dense = uniform({cfg.channels, cfg.channels, receptive_field(spec)}, rng);
}

Tensor DilationWorkload::run_dilated() const {
  Tensor h = x;
  for (std::size_t l = 0; l < stack.size(); ++l)
    h = nn::conv1d_forward(h, stack[l], nullptr, dilations[l], nn::Padding::causal);
  return h;
}

Tensor DilationWorkload::run_dense() const { return nn::conv1d_forward(x, dense, nullptr, 1, nn::Padding::causal); }

DilationBenchResult run_dilation_bench(const DilationBenchConfig& cfg) {
  const DilationWorkload w(cfg);
  DilationBenchResult r;
  r.receptive_field = w.dense.dim(2);
  using clock = std::chrono::steady_clock;
  double sink = 0.0;
  auto once = [&](auto&& fn) {
    const auto t0 = clock::now();
    for (std::size_t i = 0; i < cfg.iterations; ++i) sink += fn()[0];
    return std::chrono::duration<double>(clock::now() - t0).count();
  };
  r.dilated_seconds = r.dense_seconds = std::numeric_limits<double>::infinity();
  // Rounds alternate between the two sides so drift in clock speed hits both.
  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    r.dilated_seconds = std::min(r.dilated_seconds, once([&] { return w.run_dilated(); }));
    r.dense_seconds = std::min(r.dense_seconds, once([&] { return w.run_dense(); }));
  }
  volatile double keep = sink;  // keeps the timed loops alive
  (void)keep;
  r.ratio = r.dense_seconds / r.dilated_seconds;
  return r;
}

}  // namespace hardc::model
