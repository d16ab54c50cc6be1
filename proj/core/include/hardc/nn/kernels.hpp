#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hardc/nn/tensor.hpp"

namespace hardc::nn {

enum class Mode { train, eval };
enum class Padding { causal, same };

// Probabilities are clipped to [kProbClip, 1 - kProbClip] before any log.
inline constexpr double kProbClip = 1e-12;

// ---- dilated 1-D convolution -------------------------------------------
// x [B,T,Cin], w [Cout,Cin,K], bias [Cout] (optional) -> y [B,T,Cout].
// y[t] = sum_{k,c} w[o,c,k] * x[t + k*dilation - left, c], where left is
// (K-1)*dilation for causal padding and half of it for same padding.
Tensor conv1d_forward(const Tensor& x, const Tensor& w, const Tensor* bias, std::size_t dilation, Padding padding);
void conv1d_backward(const Tensor& x, const Tensor& w, std::size_t dilation, Padding padding, const Tensor& gy,
                     Tensor* gx, Tensor* gw, Tensor* gbias);
std::size_t conv1d_left_pad(std::size_t kernel, std::size_t dilation, Padding padding);

// Single-sequence form: x [T,Cin] -> [T,Cout].
Tensor conv1d_dilated(const Tensor& x, const Tensor& w, std::size_t dilation, Padding padding = Padding::causal);

// ---- dense ---------------------------------------------------------------
// x [B,D], w [D,O], b [O] -> [B,O].
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b);

// ---- elementwise -------------------------------------------------------
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// ---- softmax / losses ------------------------------------------------------
// Softmax over the last axis with max subtraction. Throws NumericError on
// non-finite input.
Tensor softmax(const Tensor& z);
void softmax_inplace(std::span<double> z);

// -log(clip(p[y])) for one probability vector.
double cross_entropy(std::span<const double> p, std::size_t y);
// Batch mean over rows of p [B,K].
double cross_entropy(const Tensor& p, std::span<const std::size_t> labels);

// ---- pooling ---------------------------------------------------------------
// Max pooling along axis 1 of x [B,T,C] with the given window and stride.
Tensor max_pool(const Tensor& x, std::size_t window, std::size_t stride, std::vector<std::size_t>* argmax = nullptr);
// Mean over axis 1 of x [B,T,C] -> [B,C].
Tensor global_avg_pool(const Tensor& x);

// ---- dropout -------------------------------------------------------------
// Inverted dropout: kept values are scaled by 1/(1-rate) in train mode; eval
// mode is the identity.
Tensor dropout(const Tensor& x, double rate, std::uint64_t seed, Mode mode);
Tensor dropout_mask(const Shape& shape, double rate, std::uint64_t seed);

// ---- batch normalisation ---------------------------------------------------
struct BatchNormState {
  Tensor gamma;         // [C]
  Tensor beta;          // [C]
  Tensor running_mean;  // [C]
  Tensor running_var;   // [C]
  double momentum = 0.1;
  double eps = 1e-7;

  explicit BatchNormState(std::size_t channels = 0);
};

// Normalises over every axis but the last. Train mode uses batch statistics
// and updates the running estimates (unbiased variance); eval mode uses the
// running estimates.
Tensor batch_norm(const Tensor& x, BatchNormState& state, Mode mode);

}  // namespace hardc::nn
