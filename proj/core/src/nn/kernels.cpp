#include "hardc/nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hardc/error.hpp"

namespace hardc::nn {

std::size_t conv1d_left_pad(std::size_t kernel, std::size_t dilation, Padding padding) {
  const std::size_t total = (kernel - 1) * dilation;
  return padding == Padding::causal ? total : total / 2;
}

namespace {

void check_conv(const Tensor& x, const Tensor& w, std::size_t dilation) {
  require_rank(x, 3, "conv1d input");
  require_rank(w, 3, "conv1d weight");
  if (dilation < 1) throw ShapeMismatch("conv1d dilation must be >= 1");
  if (w.dim(2) < 1) throw ShapeMismatch("conv1d kernel width must be >= 1");
  if (w.dim(1) != x.dim(2))
    throw ShapeMismatch("conv1d weight expects " + std::to_string(w.dim(1)) + " input channels, got " +
                        std::to_string(x.dim(2)));
}

// [Cout,Cin,K] -> [K,Cin,Cout] so the innermost loop runs over outputs.
std::vector<double> transpose_kernel(const Tensor& w) {
  const std::size_t co = w.dim(0), ci = w.dim(1), k = w.dim(2);
  std::vector<double> wt(co * ci * k);
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t c = 0; c < ci; ++c)
      for (std::size_t j = 0; j < k; ++j) wt[(j * ci + c) * co + o] = w.at(o, c, j);
  return wt;
}

}  // namespace

Tensor conv1d_forward(const Tensor& x, const Tensor& w, const Tensor* bias, std::size_t dilation, Padding padding) {
  check_conv(x, w, dilation);
  const std::size_t batch = x.dim(0), steps = x.dim(1), ci = x.dim(2);
  const std::size_t co = w.dim(0), kw = w.dim(2);
  if (bias != nullptr) require_shape(*bias, {co}, "conv1d bias");
  const auto wt = transpose_kernel(w);
  const auto left = static_cast<std::ptrdiff_t>(conv1d_left_pad(kw, dilation, padding));
  Tensor y({batch, steps, co});
  const double* xp = x.ptr();
  double* yp = y.ptr();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      double* yrow = yp + (b * steps + t) * co;
      if (bias != nullptr) std::copy(bias->ptr(), bias->ptr() + co, yrow);
      for (std::size_t k = 0; k < kw; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k * dilation) - left;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(steps)) continue;
        const double* xrow = xp + (b * steps + static_cast<std::size_t>(src)) * ci;
        const double* wk = wt.data() + k * ci * co;
        for (std::size_t c = 0; c < ci; ++c) {
          const double xv = xrow[c];
          if (xv == 0.0) continue;
          const double* wrow = wk + c * co;
          for (std::size_t o = 0; o < co; ++o) yrow[o] += xv * wrow[o];
        }
      }
    }
  }
  return y;
}

void conv1d_backward(const Tensor& x, const Tensor& w, std::size_t dilation, Padding padding, const Tensor& gy,
                     Tensor* gx, Tensor* gw, Tensor* gbias) {
  check_conv(x, w, dilation);
  const std::size_t batch = x.dim(0), steps = x.dim(1), ci = x.dim(2);
  const std::size_t co = w.dim(0), kw = w.dim(2);
  require_shape(gy, {batch, steps, co}, "conv1d output gradient");
  const auto wt = transpose_kernel(w);
  std::vector<double> gwt(wt.size(), 0.0);
  const auto left = static_cast<std::ptrdiff_t>(conv1d_left_pad(kw, dilation, padding));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      const double* grow = gy.ptr() + (b * steps + t) * co;
      if (gbias != nullptr)
        for (std::size_t o = 0; o < co; ++o) (*gbias)[o] += grow[o];
      for (std::size_t k = 0; k < kw; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k * dilation) - left;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(steps)) continue;
        const std::size_t s = static_cast<std::size_t>(src);
        const double* xrow = x.ptr() + (b * steps + s) * ci;
        for (std::size_t c = 0; c < ci; ++c) {
          const double* wrow = wt.data() + (k * ci + c) * co;
          double* gwrow = gwt.data() + (k * ci + c) * co;
          double acc = 0.0;
          const double xv = xrow[c];
          for (std::size_t o = 0; o < co; ++o) {
            acc += wrow[o] * grow[o];
            gwrow[o] += xv * grow[o];
          }
          if (gx != nullptr) (*gx)[(b * steps + s) * ci + c] += acc;
        }
      }
    }
  }
  if (gw != nullptr)
    for (std::size_t o = 0; o < co; ++o)
      for (std::size_t c = 0; c < ci; ++c)
        for (std::size_t k = 0; k < kw; ++k) gw->at(o, c, k) += gwt[(k * ci + c) * co + o];
}

Tensor conv1d_dilated(const Tensor& x, const Tensor& w, std::size_t dilation, Padding padding) {
  require_rank(x, 2, "conv1d_dilated input");
  const Tensor y = conv1d_forward(x.reshaped({1, x.dim(0), x.dim(1)}), w, nullptr, dilation, padding);
  return y.reshaped({x.dim(0), w.dim(0)});
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank(x, 2, "dense input");
  require_rank(w, 2, "dense weight");
  if (w.dim(0) != x.dim(1)) throw ShapeMismatch("dense weight rows must match input features");
  require_shape(b, {w.dim(1)}, "dense bias");
  const std::size_t batch = x.dim(0), in = x.dim(1), out = w.dim(1);
  Tensor y({batch, out});
  for (std::size_t r = 0; r < batch; ++r) {
    double* yrow = y.ptr() + r * out;
    std::copy(b.ptr(), b.ptr() + out, yrow);
    for (std::size_t i = 0; i < in; ++i) {
      const double xv = x.at(r, i);
      const double* wrow = w.ptr() + i * out;
      for (std::size_t o = 0; o < out; ++o) yrow[o] += xv * wrow[o];
    }
  }
  return y;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor tanh(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = std::tanh(v);
  return y;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = 1.0 / (1.0 + std::exp(-v));
  return y;
}

void softmax_inplace(std::span<double> z) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : z) {
    if (!std::isfinite(v)) throw NumericError("softmax input is not finite");
    mx = std::max(mx, v);
  }
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : z) v /= sum;
}

Tensor softmax(const Tensor& z) {
  if (z.empty()) return z;
  Tensor p = z;
  const std::size_t k = z.shape().back();
  for (std::size_t off = 0; off < p.size(); off += k) softmax_inplace(p.data().subspan(off, k));
  return p;
}

double cross_entropy(std::span<const double> p, std::size_t y) {
  if (y >= p.size()) throw IndexOutOfRange("class index " + std::to_string(y) + " outside probability vector");
  return -std::log(std::clamp(p[y], kProbClip, 1.0 - kProbClip));
}

double cross_entropy(const Tensor& p, std::span<const std::size_t> labels) {
  require_rank(p, 2, "cross_entropy probabilities");
  if (labels.size() != p.dim(0)) throw LengthMismatch("one label per probability row is required");
  if (labels.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) total += cross_entropy(p.data().subspan(r * p.dim(1), p.dim(1)), labels[r]);
  return total / static_cast<double>(labels.size());
}

Tensor max_pool(const Tensor& x, std::size_t window, std::size_t stride, std::vector<std::size_t>* argmax) {
  require_rank(x, 3, "max_pool input");
  if (window < 1 || stride < 1) throw ShapeMismatch("max_pool window and stride must be >= 1");
  const std::size_t batch = x.dim(0), steps = x.dim(1), ch = x.dim(2);
  if (window > steps) throw ShapeMismatch("max_pool window longer than the sequence");
  const std::size_t out_steps = (steps - window) / stride + 1;
  Tensor y({batch, out_steps, ch});
  if (argmax != nullptr) argmax->assign(y.size(), 0);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < out_steps; ++t)
      for (std::size_t c = 0; c < ch; ++c) {
        std::size_t best = (b * steps + t * stride) * ch + c;
        for (std::size_t j = 1; j < window; ++j) {
          const std::size_t idx = (b * steps + t * stride + j) * ch + c;
          if (x[idx] > x[best]) best = idx;
        }
        const std::size_t out = (b * out_steps + t) * ch + c;
        y[out] = x[best];
        if (argmax != nullptr) (*argmax)[out] = best;
      }
  return y;
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank(x, 3, "global_avg_pool input");
  const std::size_t batch = x.dim(0), steps = x.dim(1), ch = x.dim(2);
  Tensor y({batch, ch});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t c = 0; c < ch; ++c) y.at(b, c) += x.at(b, t, c);
  y *= 1.0 / static_cast<double>(steps);
  return y;
}

Tensor dropout_mask(const Shape& shape, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw SpecError("dropout rate must lie in [0, 1)");
  Tensor mask(shape);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (auto& v : mask.data()) v = keep(rng) ? scale : 0.0;
  return mask;
}

Tensor dropout(const Tensor& x, double rate, std::uint64_t seed, Mode mode) {
  if (mode == Mode::eval || rate == 0.0) return x;
  Tensor mask = dropout_mask(x.shape(), rate, seed);
  for (std::size_t i = 0; i < x.size(); ++i) mask[i] *= x[i];
  return mask;
}

BatchNormState::BatchNormState(std::size_t channels)
    : gamma({channels}, 1.0), beta({channels}, 0.0), running_mean({channels}, 0.0), running_var({channels}, 1.0) {}

Tensor batch_norm(const Tensor& x, BatchNormState& state, Mode mode) {
  if (x.rank() < 2) throw ShapeMismatch("batch_norm needs at least a batch and a channel axis");
  const std::size_t ch = x.shape().back();
  require_shape(state.gamma, {ch}, "batch_norm gamma");
  const std::size_t rows = x.size() / ch;
  Tensor y(x.shape());
  std::vector<double> mean(ch, 0.0), var(ch, 0.0);
  if (mode == Mode::train) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < ch; ++c) mean[c] += x[r * ch + c];
    for (auto& m : mean) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < ch; ++c) {
        const double d = x[r * ch + c] - mean[c];
        var[c] += d * d;
      }
    for (auto& v : var) v /= static_cast<double>(rows);
    const double unbias = rows > 1 ? static_cast<double>(rows) / static_cast<double>(rows - 1) : 1.0;
    for (std::size_t c = 0; c < ch; ++c) {
      state.running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mean[c];
      state.running_var[c] = (1.0 - state.momentum) * state.running_var[c] + state.momentum * var[c] * unbias;
    }
  } else {
    for (std::size_t c = 0; c < ch; ++c) {
      mean[c] = state.running_mean[c];
      var[c] = state.running_var[c];
    }
  }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < ch; ++c)
      y[r * ch + c] = state.gamma[c] * (x[r * ch + c] - mean[c]) / std::sqrt(var[c] + state.eps) + state.beta[c];
  return y;
}

}  // namespace hardc::nn
