#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hardc/nn/graph.hpp"

namespace hardc::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // "name[index]"
};

// Builds a fresh graph and returns its scalar loss. Must be deterministic.
using LossBuilder = std::function<Var(Graph&)>;

struct GradCheckOptions {
  double h = 1e-4;
  // Entries per parameter to probe (0 = all), sampled with seed.
  std::size_t max_entries = 0;
  std::uint64_t seed = 0;
  // Relative error is |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  Mode mode = Mode::train;
  std::uint64_t graph_seed = 0;
};

// Central differences against the analytic gradient of every listed parameter.
GradCheckResult check_gradients(const std::vector<Parameter*>& params, const LossBuilder& build,
                                const GradCheckOptions& opts = {});

}  // namespace hardc::nn
