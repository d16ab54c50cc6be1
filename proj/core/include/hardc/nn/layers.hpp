#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hardc/nn/graph.hpp"
#include "hardc/nn/recurrent.hpp"

// Differentiable ops recorded on a Graph. Shapes follow the batched kernels
// in kernels.hpp / recurrent.hpp.
namespace hardc::nn::ops {

Var add(Graph& g, Var a, Var b);
Var scale(Graph& g, Var a, double s);
Var sum_squares(Graph& g, Var a);
Var reshape(Graph& g, Var a, Shape shape);

Var dense(Graph& g, Var x, Var w, Var b);
Var conv1d(Graph& g, Var x, Var w, std::size_t dilation, Padding padding);
Var conv1d(Graph& g, Var x, Var w, Var bias, std::size_t dilation, Padding padding);

struct RecurrentVars {
  Var w, u, b;
};
Var recurrent(Graph& g, CellKind kind, Var x, RecurrentVars p, bool reverse);
// Forward and backward passes concatenated on the feature axis.
Var bidirectional(Graph& g, CellKind kind, Var x, RecurrentVars fw, RecurrentVars bw);

// Concatenate [B,T,C1] and [B,T,C2] (or [B,C1] and [B,C2]) on the last axis.
Var concat_last(Graph& g, Var a, Var b);
// Stack k tensors of shape [B,D] into [B,k,D].
Var stack(Graph& g, const std::vector<Var>& parts);

Var relu(Graph& g, Var x);
Var tanh(Graph& g, Var x);
Var sigmoid(Graph& g, Var x);

// Running statistics live outside the graph and are updated in train mode.
Var batch_norm(Graph& g, Var x, Var gamma, Var beta, Tensor& running_mean, Tensor& running_var,
               double momentum = 0.1, double eps = 1e-7);

Var max_pool(Graph& g, Var x, std::size_t window, std::size_t stride);
Var global_avg_pool(Graph& g, Var x);
// Mask drawn from the graph's seed stream; identity in eval mode.
Var dropout(Graph& g, Var x, double rate);

Var softmax(Graph& g, Var z);
// Batch-mean categorical cross-entropy of probability rows p [B,K].
Var cross_entropy(Graph& g, Var p, std::span<const std::size_t> labels);

// y[b,t,c] = x[b,t,c] + table[labels[b], c]
Var add_class_embedding(Graph& g, Var x, Var table, std::span<const std::size_t> labels);

// sign * mean(log(clip(d))) or, with complement, sign * mean(log(1 - clip(d))).
// Clipped entries pass no gradient.
Var mean_log(Graph& g, Var d, bool complement, double sign, double clip);

}  // namespace hardc::nn::ops

namespace hardc::nn::ops {

// sum(weights * x) as a scalar; weights is a constant of x's shape.
Var dot_const(Graph& g, Var x, const Tensor& weights);

}  // namespace hardc::nn::ops
