#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hardc/nn/kernels.hpp"
#include "hardc/nn/tensor.hpp"

namespace hardc::nn {

// A named trainable (or buffer) tensor with a gradient slot.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  Parameter(std::string name_, Tensor value_, bool trainable_ = true)
      : name(std::move(name_)), value(std::move(value_)), grad(Tensor::zeros_like(value)), trainable(trainable_) {}
  void zero_grad() { grad.fill(0.0); }
};

struct Var {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t id = npos;
  bool valid() const { return id != npos; }
};

// Reverse-mode tape. Nodes are appended in execution order, so the tape is
// already topologically sorted. A graph is single-use: backward() may run once.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Tensor& gout)>;

  explicit Graph(Mode mode = Mode::train, std::uint64_t seed = 0) : mode_(mode), rng_(seed) {}

  Var constant(Tensor value);
  Var param(Parameter& p);
  // Appends an op result. Throws NumericError if value has NaN/Inf.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  bool needs_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  // Gradient slot of v, zero-initialised on first access.
  Tensor& grad(Var v);

  // Seeds d(loss)/d(loss) = 1 and accumulates parameter gradients into each
  // Parameter::grad. Throws GraphStale on a second call.
  void backward(Var loss);

  // With gradients disabled, param() records plain constants and no
  // backward closures are kept. Used for inference.
  void set_grad_enabled(bool on) { grad_enabled_ = on; }

  Mode mode() const { return mode_; }
  std::uint64_t next_seed() { return rng_(); }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  Mode mode_;
  std::mt19937_64 rng_;
  std::vector<Node> nodes_;
  bool consumed_ = false;
  bool grad_enabled_ = true;
};

}  // namespace hardc::nn
