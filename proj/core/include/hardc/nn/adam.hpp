#pragma once

#include <cstddef>
#include <vector>

#include "hardc/nn/graph.hpp"

namespace hardc::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double l2 = 0.0;  // adds 2*l2*theta to each gradient
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  // Updates every trainable parameter from its grad. Moment buffers are
  // created on the first call; the parameter list must keep its shapes.
  void step(const std::vector<Parameter*>& params);
  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace hardc::nn
