#include "hardc/nn/graph.hpp"

#include "hardc/error.hpp"

namespace hardc::nn {

Var Graph::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("non-finite value fed into the graph");
  nodes_.push_back(Node{std::move(value), {}, false, false, {}, nullptr});
  return Var{nodes_.size() - 1};
}

Var Graph::param(Parameter& p) {
  if (!p.value.all_finite()) throw NumericError("parameter '" + p.name + "' holds non-finite values");
  nodes_.push_back(Node{p.value, {}, false, p.trainable && grad_enabled_, {}, grad_enabled_ ? &p : nullptr});
  return Var{nodes_.size() - 1};
}

Var Graph::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Graph::record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
  if (consumed_) throw GraphStale("graph already ran backward; build a new one");
  if (!value.all_finite()) throw NumericError("op produced non-finite values");
  bool needs = false;
  for (auto v : inputs) needs = needs || nodes_.at(v.id).requires_grad;
  nodes_.push_back(Node{std::move(value), {}, false, needs, needs ? std::move(backward) : BackwardFn{}, nullptr});
  return Var{nodes_.size() - 1};
}

Tensor& Graph::grad(Var v) {
  auto& node = nodes_.at(v.id);
  if (!node.has_grad) {
    node.grad = Tensor::zeros_like(node.value);
    node.has_grad = true;
  }
  return node.grad;
}

void Graph::backward(Var loss) {
  if (consumed_) throw GraphStale("backward already ran on this graph; rerun the forward pass");
  if (nodes_.at(loss.id).value.size() != 1) throw ShapeMismatch("backward needs a scalar loss");
  consumed_ = true;
  grad(loss).fill(1.0);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (!node.has_grad || !node.requires_grad) continue;
    if (node.backward) {
      // Copy first: the callback may grow other grad slots.
      const Tensor gout = node.grad;
      node.backward(*this, gout);
    }
    if (node.param != nullptr) {
      if (!node.grad.all_finite()) throw NumericError("non-finite gradient for '" + node.param->name + "'");
      node.param->grad += node.grad;
    }
  }
}

}  // namespace hardc::nn
