#include "hardc/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hardc/error.hpp"

namespace hardc::nn::ops {

Var add(Graph& g, Var a, Var b) {
  Tensor out = g.value(a);
  out += g.value(b);
  return g.record(std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& gout) {
    if (gr.needs_grad(a)) gr.grad(a) += gout;
    if (gr.needs_grad(b)) gr.grad(b) += gout;
  });
}

Var scale(Graph& g, Var a, double s) {
  Tensor out = g.value(a);
  out *= s;
  return g.record(std::move(out), {a}, [a, s](Graph& gr, const Tensor& gout) {
    Tensor& ga = gr.grad(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += s * gout[i];
  });
}

Var sum_squares(Graph& g, Var a) {
  double total = 0.0;
  for (double v : g.value(a).data()) total += v * v;
  return g.record(Tensor::scalar(total), {a}, [a](Graph& gr, const Tensor& gout) {
    const Tensor& x = gr.value(a);
    Tensor& ga = gr.grad(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * x[i] * gout[0];
  });
}

Var reshape(Graph& g, Var a, Shape shape) {
  Tensor out = g.value(a).reshaped(std::move(shape));
  return g.record(std::move(out), {a}, [a](Graph& gr, const Tensor& gout) {
    Tensor& ga = gr.grad(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gout[i];
  });
}

Var dense(Graph& g, Var x, Var w, Var b) {
  Tensor out = nn::dense(g.value(x), g.value(w), g.value(b));
  return g.record(std::move(out), {x, w, b}, [x, w, b](Graph& gr, const Tensor& gout) {
    const Tensor& xv = gr.value(x);
    const Tensor& wv = gr.value(w);
    const std::size_t batch = xv.dim(0), in = xv.dim(1), out = wv.dim(1);
    if (gr.needs_grad(x)) {
      Tensor& gx = gr.grad(x);
      for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t i = 0; i < in; ++i) {
          double acc = 0.0;
          for (std::size_t o = 0; o < out; ++o) acc += wv.at(i, o) * gout.at(r, o);
          gx.at(r, i) += acc;
        }
    }
    if (gr.needs_grad(w)) {
      Tensor& gw = gr.grad(w);
      for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t i = 0; i < in; ++i) {
          const double xi = xv.at(r, i);
          for (std::size_t o = 0; o < out; ++o) gw.at(i, o) += xi * gout.at(r, o);
        }
    }
    if (gr.needs_grad(b)) {
      Tensor& gb = gr.grad(b);
      for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t o = 0; o < out; ++o) gb[o] += gout.at(r, o);
    }
  });
}

namespace {

Var conv_impl(Graph& g, Var x, Var w, Var* bias, std::size_t dilation, Padding padding) {
  Tensor out = conv1d_forward(g.value(x), g.value(w), bias ? &g.value(*bias) : nullptr, dilation, padding);
  std::vector<Var> inputs{x, w};
  const bool has_bias = bias != nullptr;
  const Var bv = has_bias ? *bias : Var{};
  if (has_bias) inputs.push_back(bv);
  return g.record(std::move(out), inputs, [=](Graph& gr, const Tensor& gout) {
    Tensor* gx = gr.needs_grad(x) ? &gr.grad(x) : nullptr;
    Tensor* gw = gr.needs_grad(w) ? &gr.grad(w) : nullptr;
    Tensor* gb = has_bias && gr.needs_grad(bv) ? &gr.grad(bv) : nullptr;
    conv1d_backward(gr.value(x), gr.value(w), dilation, padding, gout, gx, gw, gb);
  });
}

}  // namespace

Var conv1d(Graph& g, Var x, Var w, std::size_t dilation, Padding padding) {
  return conv_impl(g, x, w, nullptr, dilation, padding);
}

Var conv1d(Graph& g, Var x, Var w, Var bias, std::size_t dilation, Padding padding) {
  return conv_impl(g, x, w, &bias, dilation, padding);
}

Var recurrent(Graph& g, CellKind kind, Var x, RecurrentVars p, bool reverse) {
  RecurrentWeights weights{g.value(p.w), g.value(p.u), g.value(p.b)};
  auto cache = std::make_shared<RecurrentCache>();
  Tensor out = recurrent_forward(kind, g.value(x), weights, reverse, cache.get());
  return g.record(std::move(out), {x, p.w, p.u, p.b}, [=](Graph& gr, const Tensor& gout) {
    RecurrentWeights wv{gr.value(p.w), gr.value(p.u), gr.value(p.b)};
    RecurrentWeights grads{Tensor::zeros_like(wv.w), Tensor::zeros_like(wv.u), Tensor::zeros_like(wv.b)};
    Tensor gx = Tensor::zeros_like(gr.value(x));
    recurrent_backward(kind, gr.value(x), wv, reverse, *cache, gout, gx, grads);
    if (gr.needs_grad(x)) gr.grad(x) += gx;
    if (gr.needs_grad(p.w)) gr.grad(p.w) += grads.w;
    if (gr.needs_grad(p.u)) gr.grad(p.u) += grads.u;
    if (gr.needs_grad(p.b)) gr.grad(p.b) += grads.b;
  });
}

Var bidirectional(Graph& g, CellKind kind, Var x, RecurrentVars fw, RecurrentVars bw) {
  const Var f = recurrent(g, kind, x, fw, false);
  const Var b = recurrent(g, kind, x, bw, true);
  return concat_last(g, f, b);
}

Var concat_last(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  if (av.rank() != bv.rank() || av.rank() < 2) throw ShapeMismatch("concat_last needs tensors of equal rank >= 2");
  Shape shape = av.shape();
  for (std::size_t i = 0; i + 1 < shape.size(); ++i)
    if (shape[i] != bv.dim(i)) throw ShapeMismatch("concat_last leading dimensions differ");
  const std::size_t ca = av.shape().back(), cb = bv.shape().back();
  const std::size_t rows = av.size() / ca;
  shape.back() = ca + cb;
  Tensor out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(av.ptr() + r * ca, av.ptr() + (r + 1) * ca, out.ptr() + r * (ca + cb));
    std::copy(bv.ptr() + r * cb, bv.ptr() + (r + 1) * cb, out.ptr() + r * (ca + cb) + ca);
  }
  return g.record(std::move(out), {a, b}, [=](Graph& gr, const Tensor& gout) {
    if (gr.needs_grad(a)) {
      Tensor& ga = gr.grad(a);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < ca; ++c) ga[r * ca + c] += gout[r * (ca + cb) + c];
    }
    if (gr.needs_grad(b)) {
      Tensor& gb = gr.grad(b);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cb; ++c) gb[r * cb + c] += gout[r * (ca + cb) + ca + c];
    }
  });
}

Var stack(Graph& g, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeMismatch("stack needs at least one tensor");
  const Tensor& first = g.value(parts.front());
  require_rank(first, 2, "stack part");
  const std::size_t batch = first.dim(0), dim = first.dim(1), k = parts.size();
  Tensor out({batch, k, dim});
  for (std::size_t i = 0; i < k; ++i) {
    const Tensor& p = g.value(parts[i]);
    require_shape(p, {batch, dim}, "stack part");
    for (std::size_t b = 0; b < batch; ++b)
      std::copy(p.ptr() + b * dim, p.ptr() + (b + 1) * dim, out.ptr() + (b * k + i) * dim);
  }
  return g.record(std::move(out), parts, [=](Graph& gr, const Tensor& gout) {
    for (std::size_t i = 0; i < k; ++i) {
      if (!gr.needs_grad(parts[i])) continue;
      Tensor& gp = gr.grad(parts[i]);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t d = 0; d < dim; ++d) gp[b * dim + d] += gout[(b * k + i) * dim + d];
    }
  });
}

Var relu(Graph& g, Var x) {
  return g.record(nn::relu(g.value(x)), {x}, [x](Graph& gr, const Tensor& gout) {
    const Tensor& xv = gr.value(x);
    Tensor& gx = gr.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (xv[i] > 0.0) gx[i] += gout[i];
  });
}

Var tanh(Graph& g, Var x) {
  Tensor out = nn::tanh(g.value(x));
  Tensor saved = out;
  return g.record(std::move(out), {x}, [x, saved = std::move(saved)](Graph& gr, const Tensor& gout) {
    Tensor& gx = gr.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gout[i] * (1.0 - saved[i] * saved[i]);
  });
}

Var sigmoid(Graph& g, Var x) {
  Tensor out = nn::sigmoid(g.value(x));
  Tensor saved = out;
  return g.record(std::move(out), {x}, [x, saved = std::move(saved)](Graph& gr, const Tensor& gout) {
    Tensor& gx = gr.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gout[i] * saved[i] * (1.0 - saved[i]);
  });
}

Var batch_norm(Graph& g, Var x, Var gamma, Var beta, Tensor& running_mean, Tensor& running_var, double momentum,
               double eps) {
  const Tensor& xv = g.value(x);
  if (xv.rank() < 2) throw ShapeMismatch("batch_norm needs at least a batch and a channel axis");
  const std::size_t ch = xv.shape().back();
  const std::size_t rows = xv.size() / ch;
  const Tensor& gm = g.value(gamma);
  const Tensor& bt = g.value(beta);
  require_shape(gm, {ch}, "batch_norm gamma");
  require_shape(bt, {ch}, "batch_norm beta");
  require_shape(running_mean, {ch}, "batch_norm running mean");
  require_shape(running_var, {ch}, "batch_norm running var");

  const bool train = g.mode() == Mode::train;
  std::vector<double> mean(ch, 0.0), var(ch, 0.0);
  if (train) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < ch; ++c) mean[c] += xv[r * ch + c];
    for (auto& m : mean) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < ch; ++c) {
        const double d = xv[r * ch + c] - mean[c];
        var[c] += d * d;
      }
    for (auto& v : var) v /= static_cast<double>(rows);
    const double unbias = rows > 1 ? static_cast<double>(rows) / static_cast<double>(rows - 1) : 1.0;
    for (std::size_t c = 0; c < ch; ++c) {
      running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * mean[c];
      running_var[c] = (1.0 - momentum) * running_var[c] + momentum * var[c] * unbias;
    }
  } else {
    for (std::size_t c = 0; c < ch; ++c) {
      mean[c] = running_mean[c];
      var[c] = running_var[c];
    }
  }
  std::vector<double> inv_std(ch);
  for (std::size_t c = 0; c < ch; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + eps);
  Tensor xhat(xv.shape());
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < ch; ++c) {
      const double h = (xv[r * ch + c] - mean[c]) * inv_std[c];
      xhat[r * ch + c] = h;
      out[r * ch + c] = gm[c] * h + bt[c];
    }
  return g.record(std::move(out), {x, gamma, beta},
                  [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& gr, const Tensor& gout) {
                    const Tensor& gmv = gr.value(gamma);
                    std::vector<double> sum_dy(ch, 0.0), sum_dy_xhat(ch, 0.0);
                    for (std::size_t r = 0; r < rows; ++r)
                      for (std::size_t c = 0; c < ch; ++c) {
                        sum_dy[c] += gout[r * ch + c];
                        sum_dy_xhat[c] += gout[r * ch + c] * xhat[r * ch + c];
                      }
                    if (gr.needs_grad(gamma)) {
                      Tensor& gg = gr.grad(gamma);
                      for (std::size_t c = 0; c < ch; ++c) gg[c] += sum_dy_xhat[c];
                    }
                    if (gr.needs_grad(beta)) {
                      Tensor& gb = gr.grad(beta);
                      for (std::size_t c = 0; c < ch; ++c) gb[c] += sum_dy[c];
                    }
                    if (!gr.needs_grad(x)) return;
                    Tensor& gx = gr.grad(x);
                    const double n = static_cast<double>(rows);
                    for (std::size_t r = 0; r < rows; ++r)
                      for (std::size_t c = 0; c < ch; ++c) {
                        const double dy = gout[r * ch + c];
                        if (train) {
                          gx[r * ch + c] += gmv[c] * inv_std[c] *
                                            (dy - sum_dy[c] / n - xhat[r * ch + c] * sum_dy_xhat[c] / n);
                        } else {
                          gx[r * ch + c] += gmv[c] * inv_std[c] * dy;
                        }
                      }
                  });
}

Var max_pool(Graph& g, Var x, std::size_t window, std::size_t stride) {
  std::vector<std::size_t> argmax;
  Tensor out = nn::max_pool(g.value(x), window, stride, &argmax);
  return g.record(std::move(out), {x}, [x, argmax = std::move(argmax)](Graph& gr, const Tensor& gout) {
    Tensor& gx = gr.grad(x);
    for (std::size_t i = 0; i < argmax.size(); ++i) gx[argmax[i]] += gout[i];
  });
}

Var global_avg_pool(Graph& g, Var x) {
  Tensor out = nn::global_avg_pool(g.value(x));
  return g.record(std::move(out), {x}, [x](Graph& gr, const Tensor& gout) {
    Tensor& gx = gr.grad(x);
    const std::size_t batch = gx.dim(0), steps = gx.dim(1), ch = gx.dim(2);
    const double inv = 1.0 / static_cast<double>(steps);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t c = 0; c < ch; ++c) gx.at(b, t, c) += gout.at(b, c) * inv;
  });
}

Var dropout(Graph& g, Var x, double rate) {
  if (g.mode() == Mode::eval || rate == 0.0) return x;
  Tensor mask = dropout_mask(g.value(x).shape(), rate, g.next_seed());
  Tensor out = g.value(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return g.record(std::move(out), {x}, [x, mask = std::move(mask)](Graph& gr, const Tensor& gout) {
    Tensor& gx = gr.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gout[i] * mask[i];
  });
}

Var softmax(Graph& g, Var z) {
  Tensor p = nn::softmax(g.value(z));
  Tensor saved = p;
  return g.record(std::move(p), {z}, [z, saved = std::move(saved)](Graph& gr, const Tensor& gout) {
    Tensor& gz = gr.grad(z);
    const std::size_t k = saved.shape().back();
    for (std::size_t off = 0; off < saved.size(); off += k) {
      double dot = 0.0;
      for (std::size_t j = 0; j < k; ++j) dot += saved[off + j] * gout[off + j];
      for (std::size_t j = 0; j < k; ++j) gz[off + j] += saved[off + j] * (gout[off + j] - dot);
    }
  });
}

Var cross_entropy(Graph& g, Var p, std::span<const std::size_t> labels) {
  const Tensor& pv = g.value(p);
  const double loss = nn::cross_entropy(pv, labels);
  std::vector<std::size_t> y(labels.begin(), labels.end());
  return g.record(Tensor::scalar(loss), {p}, [p, y = std::move(y)](Graph& gr, const Tensor& gout) {
    const Tensor& probs = gr.value(p);
    Tensor& gp = gr.grad(p);
    const std::size_t k = probs.dim(1);
    const double inv = 1.0 / static_cast<double>(y.size());
    for (std::size_t r = 0; r < y.size(); ++r) {
      const double v = probs[r * k + y[r]];
      if (v > kProbClip && v < 1.0 - kProbClip) gp[r * k + y[r]] += -gout[0] * inv / v;
    }
  });
}

Var add_class_embedding(Graph& g, Var x, Var table, std::span<const std::size_t> labels) {
  const Tensor& xv = g.value(x);
  const Tensor& tv = g.value(table);
  require_rank(xv, 3, "class embedding input");
  require_rank(tv, 2, "class embedding table");
  const std::size_t batch = xv.dim(0), steps = xv.dim(1), ch = xv.dim(2);
  if (tv.dim(1) != ch) throw ShapeMismatch("class embedding width must match channels");
  if (labels.size() != batch) throw LengthMismatch("one label per batch row is required");
  for (auto l : labels)
    if (l >= tv.dim(0)) throw IndexOutOfRange("class label outside embedding table");
  Tensor out = xv;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t c = 0; c < ch; ++c) out.at(b, t, c) += tv.at(labels[b], c);
  std::vector<std::size_t> y(labels.begin(), labels.end());
  return g.record(std::move(out), {x, table}, [=, y = std::move(y)](Graph& gr, const Tensor& gout) {
    if (gr.needs_grad(x)) gr.grad(x) += gout;
    if (gr.needs_grad(table)) {
      Tensor& gt = gr.grad(table);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < steps; ++t)
          for (std::size_t c = 0; c < ch; ++c) gt.at(y[b], c) += gout.at(b, t, c);
    }
  });
}

Var mean_log(Graph& g, Var d, bool complement, double sign, double clip) {
  const Tensor& dv = g.value(d);
  if (dv.empty()) throw EmptyDataset("mean_log over an empty batch");
  double total = 0.0;
  for (double v : dv.data()) {
    const double c = std::clamp(v, clip, 1.0 - clip);
    total += std::log(complement ? 1.0 - c : c);
  }
  const double n = static_cast<double>(dv.size());
  return g.record(Tensor::scalar(sign * total / n), {d}, [=](Graph& gr, const Tensor& gout) {
    const Tensor& values = gr.value(d);
    Tensor& gd = gr.grad(d);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v = values[i];
      if (v <= clip || v >= 1.0 - clip) continue;
      gd[i] += gout[0] * sign / n * (complement ? -1.0 / (1.0 - v) : 1.0 / v);
    }
  });
}

}  // namespace hardc::nn::ops

namespace hardc::nn::ops {

Var dot_const(Graph& g, Var x, const Tensor& weights) {
  const Tensor& xv = g.value(x);
  if (xv.shape() != weights.shape())
    throw ShapeMismatch("dot_const weights " + shape_string(weights.shape()) + " vs " + shape_string(xv.shape()));
  double s = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) s += xv[i] * weights[i];
  return g.record(Tensor::scalar(s), {x}, [x, weights](Graph& gr, const Tensor& gout) {
    Tensor& gx = gr.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += weights[i] * gout[0];
  });
}

}  // namespace hardc::nn::ops
