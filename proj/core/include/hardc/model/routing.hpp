#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hardc/nn/graph.hpp"

namespace hardc::model {

// squash(s) = (|s|^2 / (1 + |s|^2)) * s / |s|; zero maps to zero.
void squash_inplace(std::span<double> s);

struct RoutingState {
  nn::Tensor b;   // [n, M] agreement logits
  nn::Tensor c;   // [n, M] coupling coefficients
  nn::Tensor cv;  // [M, dv] target vectors
};

// rv [n,d], w [M,d,dv] -> cv [M,dv]. If trace is given, the state after each
// iteration is appended (b as used for that iteration's coupling).
nn::Tensor routing(const nn::Tensor& rv, const nn::Tensor& w, std::size_t iters,
                   std::vector<RoutingState>* trace = nullptr);

// cv [M,dv], q [dv] -> o [dv]; alpha receives the attention weights.
nn::Tensor attention_aggregate(const nn::Tensor& cv, const nn::Tensor& q, nn::Tensor* alpha = nullptr);

// Batched graph ops. rv [B,n,d], w [M,d,dv] -> [B,M,dv].
nn::Var routing_op(nn::Graph& g, nn::Var rv, nn::Var w, std::size_t iters);
// cv [B,M,dv], q [dv] -> [B,dv].
nn::Var attention_op(nn::Graph& g, nn::Var cv, nn::Var q);

}  // namespace hardc::model
