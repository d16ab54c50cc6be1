#include "hardc/nn/recurrent.hpp"

#include <cmath>

#include "hardc/error.hpp"

namespace hardc::nn {

namespace {

double sigm(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void check(CellKind kind, const Tensor& x, const RecurrentWeights& p) {
  require_rank(x, 3, "recurrent input");
  require_rank(p.u, 2, "recurrent U");
  const std::size_t units = p.u.dim(0);
  const std::size_t g = gate_count(kind) * units;
  require_shape(p.w, {x.dim(2), g}, "recurrent W");
  require_shape(p.u, {units, g}, "recurrent U");
  require_shape(p.b, {g}, "recurrent b");
}

// out[0:g] += v[0:n] * M[n, g]
void accumulate_vm(const double* v, const double* m, std::size_t n, std::size_t g, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    const double* row = m + i * g;
    for (std::size_t j = 0; j < g; ++j) out[j] += vi * row[j];
  }
}

// out[0:n] += M[n, g] * v[0:g]
void accumulate_mv(const double* m, const double* v, std::size_t n, std::size_t g, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = m + i * g;
    double acc = 0.0;
    for (std::size_t j = 0; j < g; ++j) acc += row[j] * v[j];
    out[i] += acc;
  }
}

// M[n, g] += a[0:n] outer v[0:g]
void accumulate_outer(const double* a, const double* v, std::size_t n, std::size_t g, double* m) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    double* row = m + i * g;
    for (std::size_t j = 0; j < g; ++j) row[j] += ai * v[j];
  }
}

}  // namespace

RecurrentWeights RecurrentWeights::zeros(CellKind kind, std::size_t input_dim, std::size_t units) {
  const std::size_t g = gate_count(kind) * units;
  return {Tensor({input_dim, g}), Tensor({units, g}), Tensor({g})};
}

Tensor recurrent_forward(CellKind kind, const Tensor& x, const RecurrentWeights& p, bool reverse,
                         RecurrentCache* cache) {
  check(kind, x, p);
  const std::size_t batch = x.dim(0), steps = x.dim(1), in = x.dim(2);
  const std::size_t units = p.u.dim(0);
  const std::size_t g = gate_count(kind) * units;
  Tensor out({batch, steps, units});
  if (cache != nullptr) {
    cache->gates.assign(batch * steps * g, 0.0);
    cache->h.assign(batch * steps * units, 0.0);
    cache->c.assign(kind == CellKind::lstm ? batch * steps * units : 0, 0.0);
    cache->rh.assign(kind == CellKind::gru ? batch * steps * units : 0, 0.0);
  }
  std::vector<double> h(units), c(units), pre(g), hidden(g), rh(units);
  for (std::size_t b = 0; b < batch; ++b) {
    std::fill(h.begin(), h.end(), 0.0);
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t t = reverse ? steps - 1 - s : s;
      const double* xt = x.ptr() + (b * steps + t) * in;
      std::copy(p.b.ptr(), p.b.ptr() + g, pre.begin());
      accumulate_vm(xt, p.w.ptr(), in, g, pre.data());
      const std::size_t off = (b * steps + t);
      if (kind == CellKind::lstm) {
        accumulate_vm(h.data(), p.u.ptr(), units, g, pre.data());
        for (std::size_t j = 0; j < units; ++j) {
          const double ig = sigm(pre[j]);
          const double fg = sigm(pre[units + j]);
          const double cg = std::tanh(pre[2 * units + j]);
          const double og = sigm(pre[3 * units + j]);
          c[j] = fg * c[j] + ig * cg;
          h[j] = og * std::tanh(c[j]);
          pre[j] = ig;
          pre[units + j] = fg;
          pre[2 * units + j] = cg;
          pre[3 * units + j] = og;
        }
        if (cache != nullptr) std::copy(c.begin(), c.end(), cache->c.begin() + static_cast<std::ptrdiff_t>(off * units));
      } else {
        // Update and reset gates see U*h'; the candidate sees U_n*(r*h').
        std::fill(hidden.begin(), hidden.end(), 0.0);
        accumulate_vm(h.data(), p.u.ptr(), units, g, hidden.data());
        for (std::size_t j = 0; j < units; ++j) {
          pre[j] = sigm(pre[j] + hidden[j]);
          pre[units + j] = sigm(pre[units + j] + hidden[units + j]);
          rh[j] = pre[units + j] * h[j];
        }
        std::vector<double> cand(pre.begin() + static_cast<std::ptrdiff_t>(2 * units), pre.end());
        for (std::size_t i = 0; i < units; ++i) {
          const double* row = p.u.ptr() + i * g + 2 * units;
          for (std::size_t j = 0; j < units; ++j) cand[j] += rh[i] * row[j];
        }
        for (std::size_t j = 0; j < units; ++j) {
          const double n = std::tanh(cand[j]);
          pre[2 * units + j] = n;
          const double z = pre[j];
          h[j] = z * h[j] + (1.0 - z) * n;
        }
        if (cache != nullptr) std::copy(rh.begin(), rh.end(), cache->rh.begin() + static_cast<std::ptrdiff_t>(off * units));
      }
      std::copy(h.begin(), h.end(), out.ptr() + off * units);
      if (cache != nullptr) {
        std::copy(pre.begin(), pre.end(), cache->gates.begin() + static_cast<std::ptrdiff_t>(off * g));
        std::copy(h.begin(), h.end(), cache->h.begin() + static_cast<std::ptrdiff_t>(off * units));
      }
    }
  }
  return out;
}

void recurrent_backward(CellKind kind, const Tensor& x, const RecurrentWeights& p, bool reverse,
                        const RecurrentCache& cache, const Tensor& gh, Tensor& gx, RecurrentWeights& grads) {
  check(kind, x, p);
  const std::size_t batch = x.dim(0), steps = x.dim(1), in = x.dim(2);
  const std::size_t units = p.u.dim(0);
  const std::size_t g = gate_count(kind) * units;
  std::vector<double> dh(units), dc(units), dpre(g), dh_prev(units), drh(units);
  const std::vector<double> zeros(units, 0.0);

  for (std::size_t b = 0; b < batch; ++b) {
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    std::fill(dc.begin(), dc.end(), 0.0);
    for (std::size_t s = steps; s-- > 0;) {
      const std::size_t t = reverse ? steps - 1 - s : s;
      const std::size_t off = b * steps + t;
      const double* gate = cache.gates.data() + off * g;
      const double* hprev = zeros.data();
      const double* cprev = zeros.data();
      if (s > 0) {
        const std::size_t tp = reverse ? t + 1 : t - 1;
        hprev = cache.h.data() + (b * steps + tp) * units;
        if (kind == CellKind::lstm) cprev = cache.c.data() + (b * steps + tp) * units;
      }
      for (std::size_t j = 0; j < units; ++j) dh[j] = gh[off * units + j] + dh_prev[j];
      std::fill(dh_prev.begin(), dh_prev.end(), 0.0);

      if (kind == CellKind::lstm) {
        const double* cc = cache.c.data() + off * units;
        for (std::size_t j = 0; j < units; ++j) {
          const double ig = gate[j], fg = gate[units + j], cg = gate[2 * units + j], og = gate[3 * units + j];
          const double tc = std::tanh(cc[j]);
          const double dcj = dc[j] + dh[j] * og * (1.0 - tc * tc);
          dpre[j] = dcj * cg * ig * (1.0 - ig);
          dpre[units + j] = dcj * cprev[j] * fg * (1.0 - fg);
          dpre[2 * units + j] = dcj * ig * (1.0 - cg * cg);
          dpre[3 * units + j] = dh[j] * tc * og * (1.0 - og);
          dc[j] = dcj * fg;
        }
        accumulate_mv(p.u.ptr(), dpre.data(), units, g, dh_prev.data());
        accumulate_outer(hprev, dpre.data(), units, g, grads.u.ptr());
      } else {
        const double* rh = cache.rh.data() + off * units;
        for (std::size_t j = 0; j < units; ++j) {
          const double z = gate[j], n = gate[2 * units + j];
          dpre[j] = dh[j] * (hprev[j] - n) * z * (1.0 - z);
          dpre[2 * units + j] = dh[j] * (1.0 - z) * (1.0 - n * n);
          dh_prev[j] += dh[j] * z;
        }
        // Candidate path through U_n (r*h').
        std::fill(drh.begin(), drh.end(), 0.0);
        for (std::size_t i = 0; i < units; ++i) {
          const double* row = p.u.ptr() + i * g + 2 * units;
          double* grow = grads.u.ptr() + i * g + 2 * units;
          double acc = 0.0;
          for (std::size_t j = 0; j < units; ++j) {
            acc += row[j] * dpre[2 * units + j];
            grow[j] += rh[i] * dpre[2 * units + j];
          }
          drh[i] = acc;
        }
        for (std::size_t j = 0; j < units; ++j) {
          const double r = gate[units + j];
          dpre[units + j] = drh[j] * hprev[j] * r * (1.0 - r);
          dh_prev[j] += drh[j] * r;
        }
        // Update/reset paths through U.
        for (std::size_t i = 0; i < units; ++i) {
          const double* row = p.u.ptr() + i * g;
          double* grow = grads.u.ptr() + i * g;
          double acc = 0.0;
          for (std::size_t j = 0; j < 2 * units; ++j) {
            acc += row[j] * dpre[j];
            grow[j] += hprev[i] * dpre[j];
          }
          dh_prev[i] += acc;
        }
      }
      const double* xt = x.ptr() + off * in;
      accumulate_outer(xt, dpre.data(), in, g, grads.w.ptr());
      for (std::size_t j = 0; j < g; ++j) grads.b[j] += dpre[j];
      accumulate_mv(p.w.ptr(), dpre.data(), in, g, gx.ptr() + off * in);
    }
  }
}

namespace {

Tensor bidirectional(CellKind kind, const Tensor& x, const BiRecurrentWeights& p) {
  require_rank(x, 2, "bidirectional input");
  const Tensor xb = x.reshaped({1, x.dim(0), x.dim(1)});
  const Tensor fw = recurrent_forward(kind, xb, p.forward, false);
  const Tensor bw = recurrent_forward(kind, xb, p.backward, true);
  const std::size_t steps = x.dim(0), uf = p.forward.units(), ub = p.backward.units();
  Tensor out({steps, uf + ub});
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t j = 0; j < uf; ++j) out.at(t, j) = fw[t * uf + j];
    for (std::size_t j = 0; j < ub; ++j) out.at(t, uf + j) = bw[t * ub + j];
  }
  return out;
}

}  // namespace

Tensor bilstm_forward(const Tensor& x, const BiRecurrentWeights& p) { return bidirectional(CellKind::lstm, x, p); }
Tensor bigru_forward(const Tensor& x, const BiRecurrentWeights& p) { return bidirectional(CellKind::gru, x, p); }

}  // namespace hardc::nn
