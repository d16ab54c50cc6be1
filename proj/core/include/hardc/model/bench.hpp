#pragma once

#include <cstddef>
#include <cstdint>

#include "hardc/nn/tensor.hpp"

namespace hardc::model {

struct DilationBenchConfig {
  std::size_t width = 8;    // w
  std::size_t levels = 3;   // L
  std::size_t steps = 360;  // T
  std::size_t channels = 8;
  std::size_t iterations = 1000;
  std::size_t rounds = 5;  // best round is reported
  std::uint64_t seed = 0;
};

struct DilationBenchResult {
  std::size_t receptive_field = 0;
  double dilated_seconds = 0.0;  // best round, all iterations
  double dense_seconds = 0.0;
  double ratio = 0.0;  // dense / dilated
};

// Workload shared by the bench subcommand and the microbenchmarks: the
// model's dilated causal stack against one dense causal conv whose kernel
// spans the same receptive field.
struct DilationWorkload {
  nn::Tensor x;                    // [1, T, C]
  std::vector<nn::Tensor> stack;   // L kernels [C, C, w]
  std::vector<std::size_t> dilations;
  nn::Tensor dense;                // [C, C, RF]

  explicit DilationWorkload(const DilationBenchConfig& cfg);
  nn::Tensor run_dilated() const;
  nn::Tensor run_dense() const;
};

DilationBenchResult run_dilation_bench(const DilationBenchConfig& cfg);

}  // namespace hardc::model
