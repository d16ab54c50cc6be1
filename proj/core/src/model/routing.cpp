#include "hardc/model/routing.hpp"

#include <cmath>
#include <memory>

#include "hardc/error.hpp"
#include "hardc/nn/kernels.hpp"

namespace hardc::model {

using nn::Tensor;

void squash_inplace(std::span<double> s) {
  double n2 = 0.0;
  for (double v : s) n2 += v * v;
  if (n2 == 0.0) return;
  const double f = std::sqrt(n2) / (1.0 + n2);
  for (double& v : s) v *= f;
}

namespace {

// Everything the backward pass needs for one sample.
struct RoutingCache {
  std::vector<double> p;                // [n, M, dv] prediction vectors
  std::vector<std::vector<double>> c;   // per iteration [n, M]
  std::vector<std::vector<double>> s;   // per iteration [M, dv]
  std::vector<std::vector<double>> v;   // per iteration [M, dv]
};

void check_routing_shapes(const Tensor& rv, const Tensor& w, std::size_t iters) {
  if (iters < 1) throw SpecError("routing needs at least one iteration");
  if (w.rank() != 3) throw ShapeMismatch("routing weights must be [M,d,dv], got " + nn::shape_string(w.shape()));
  if (rv.shape().back() != w.dim(1))
    throw ShapeMismatch("routing input width " + std::to_string(rv.shape().back()) + " does not match weights " +
                        nn::shape_string(w.shape()));
}

// rv points at n*d inputs; writes cv (M*dv) and optionally fills the cache.
void route_one(const double* rv, std::size_t n, const Tensor& w, std::size_t iters, double* cv, RoutingCache* cache,
               std::vector<RoutingState>* trace) {
  const std::size_t m = w.dim(0), d = w.dim(1), dv = w.dim(2);
  std::vector<double> p(n * m * dv, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double* pj = &p[(i * m + j) * dv];
      for (std::size_t a = 0; a < d; ++a) {
        const double x = rv[i * d + a];
        if (x == 0.0) continue;
        const double* wr = w.ptr() + (j * d + a) * dv;
        for (std::size_t e = 0; e < dv; ++e) pj[e] += x * wr[e];
      }
    }
  std::vector<double> b(n * m, 0.0), c(n * m), s(m * dv), v(m * dv);
  for (std::size_t r = 0; r < iters; ++r) {
    c = b;
    for (std::size_t i = 0; i < n; ++i) nn::softmax_inplace(std::span<double>(&c[i * m], m));
    std::fill(s.begin(), s.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double cij = c[i * m + j];
        const double* pj = &p[(i * m + j) * dv];
        for (std::size_t e = 0; e < dv; ++e) s[j * dv + e] += cij * pj[e];
      }
    v = s;
    for (std::size_t j = 0; j < m; ++j) squash_inplace(std::span<double>(&v[j * dv], dv));
    if (trace) trace->push_back({Tensor({n, m}, b), Tensor({n, m}, c), Tensor({m, dv}, v)});
    if (cache) {
      cache->c.push_back(c);
      cache->s.push_back(s);
      cache->v.push_back(v);
    }
    if (r + 1 < iters) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double* pj = &p[(i * m + j) * dv];
          double a = 0.0;
          for (std::size_t e = 0; e < dv; ++e) a += v[j * dv + e] * pj[e];
          b[i * m + j] += a;
        }
    }
  }
  std::copy(v.begin(), v.end(), cv);
  if (cache) cache->p = std::move(p);
}

// Accumulates d(loss)/d(rv) into grv (n*d) and d(loss)/dW into gw.
void route_one_backward(const double* rv, std::size_t n, const Tensor& w, std::size_t iters, const RoutingCache& cache,
                        const double* gout, double* grv, Tensor* gw) {
  const std::size_t m = w.dim(0), d = w.dim(1), dv = w.dim(2);
  const auto& p = cache.p;
  std::vector<double> gp(n * m * dv, 0.0);
  std::vector<double> gb(n * m, 0.0);  // gradient w.r.t. b after iteration r
  std::vector<double> gv(m * dv), gs(m * dv), gc(n * m);
  for (std::size_t r = iters; r-- > 0;) {
    const auto& c = cache.c[r];
    const auto& s = cache.s[r];
    const auto& v = cache.v[r];
    if (r + 1 == iters) {
      std::copy(gout, gout + m * dv, gv.begin());
    } else {
      std::fill(gv.begin(), gv.end(), 0.0);
      // b_{r+1} = b_r + a_r with a_ij = v_j . p_{j|i}
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          const double ga = gb[i * m + j];
          if (ga == 0.0) continue;
          const double* pj = &p[(i * m + j) * dv];
          double* gpj = &gp[(i * m + j) * dv];
          for (std::size_t e = 0; e < dv; ++e) {
            gv[j * dv + e] += ga * pj[e];
            gpj[e] += ga * v[j * dv + e];
          }
        }
    }
    // squash: v = f(|s|) s with f(n) = n / (1 + n^2)
    for (std::size_t j = 0; j < m; ++j) {
      const double* sj = &s[j * dv];
      const double* gvj = &gv[j * dv];
      double n2 = 0.0, dot = 0.0;
      for (std::size_t e = 0; e < dv; ++e) {
        n2 += sj[e] * sj[e];
        dot += sj[e] * gvj[e];
      }
      double* gsj = &gs[j * dv];
      if (n2 == 0.0) {
        std::fill(gsj, gsj + dv, 0.0);
        continue;
      }
      const double nn_ = std::sqrt(n2);
      const double f = nn_ / (1.0 + n2);
      const double fp = (1.0 - n2) / ((1.0 + n2) * (1.0 + n2));
      for (std::size_t e = 0; e < dv; ++e) gsj[e] = f * gvj[e] + fp / nn_ * dot * sj[e];
    }
    // s_j = sum_i c_ij p_{j|i}
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double* pj = &p[(i * m + j) * dv];
        double* gpj = &gp[(i * m + j) * dv];
        const double cij = c[i * m + j];
        double acc = 0.0;
        for (std::size_t e = 0; e < dv; ++e) {
          acc += gs[j * dv + e] * pj[e];
          gpj[e] += cij * gs[j * dv + e];
        }
        gc[i * m + j] = acc;
      }
    // c = row softmax(b_r); gb accumulates on top of the identity path
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += c[i * m + j] * gc[i * m + j];
      for (std::size_t j = 0; j < m; ++j) gb[i * m + j] += c[i * m + j] * (gc[i * m + j] - dot);
    }
  }
  // p_{j|i} = rv_i W_j
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double* gpj = &gp[(i * m + j) * dv];
      for (std::size_t a = 0; a < d; ++a) {
        const double* wr = w.ptr() + (j * d + a) * dv;
        double acc = 0.0;
        for (std::size_t e = 0; e < dv; ++e) acc += wr[e] * gpj[e];
        if (grv) grv[i * d + a] += acc;
        if (gw) {
          double* gwr = gw->ptr() + (j * d + a) * dv;
          const double x = rv[i * d + a];
          for (std::size_t e = 0; e < dv; ++e) gwr[e] += x * gpj[e];
        }
      }
    }
}

void attend_one(const double* cv, std::size_t m, std::size_t dv, const double* q, double* o, double* alpha) {
  for (std::size_t i = 0; i < m; ++i) {
    double e = 0.0;
    for (std::size_t k = 0; k < dv; ++k) e += q[k] * cv[i * dv + k];
    alpha[i] = e;
  }
  nn::softmax_inplace(std::span<double>(alpha, m));
  std::fill(o, o + dv, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < dv; ++k) o[k] += alpha[i] * cv[i * dv + k];
}

}  // namespace

Tensor routing(const Tensor& rv, const Tensor& w, std::size_t iters, std::vector<RoutingState>* trace) {
  nn::require_rank(rv, 2, "routing input");
  check_routing_shapes(rv, w, iters);
  Tensor cv({w.dim(0), w.dim(2)});
  route_one(rv.ptr(), rv.dim(0), w, iters, cv.ptr(), nullptr, trace);
  return cv;
}

Tensor attention_aggregate(const Tensor& cv, const Tensor& q, Tensor* alpha) {
  nn::require_rank(cv, 2, "attention targets");
  nn::require_shape(q, {cv.dim(1)}, "attention query");
  Tensor o({cv.dim(1)});
  Tensor a({cv.dim(0)});
  attend_one(cv.ptr(), cv.dim(0), cv.dim(1), q.ptr(), o.ptr(), a.ptr());
  if (alpha) *alpha = std::move(a);
  return o;
}

nn::Var routing_op(nn::Graph& g, nn::Var rv, nn::Var w, std::size_t iters) {
  const Tensor& x = g.value(rv);
  const Tensor& wv = g.value(w);
  nn::require_rank(x, 3, "routing input");
  check_routing_shapes(x, wv, iters);
  const std::size_t batch = x.dim(0), n = x.dim(1), d = x.dim(2), m = wv.dim(0), dv = wv.dim(2);
  const bool keep = g.needs_grad(rv) || g.needs_grad(w);
  auto caches = std::make_shared<std::vector<RoutingCache>>(keep ? batch : 0);
  Tensor out({batch, m, dv});
  for (std::size_t b = 0; b < batch; ++b)
    route_one(x.ptr() + b * n * d, n, wv, iters, out.ptr() + b * m * dv, keep ? &(*caches)[b] : nullptr, nullptr);
  return g.record(std::move(out), {rv, w}, [=](nn::Graph& gr, const Tensor& gout) {
    const Tensor& xv = gr.value(rv);
    const Tensor& wt = gr.value(w);
    double* grv = gr.needs_grad(rv) ? gr.grad(rv).ptr() : nullptr;
    Tensor* gw = gr.needs_grad(w) ? &gr.grad(w) : nullptr;
    for (std::size_t b = 0; b < batch; ++b)
      route_one_backward(xv.ptr() + b * n * d, n, wt, iters, (*caches)[b], gout.ptr() + b * m * dv,
                         grv ? grv + b * n * d : nullptr, gw);
  });
}

nn::Var attention_op(nn::Graph& g, nn::Var cv, nn::Var q) {
  const Tensor& c = g.value(cv);
  const Tensor& qv = g.value(q);
  nn::require_rank(c, 3, "attention targets");
  const std::size_t batch = c.dim(0), m = c.dim(1), dv = c.dim(2);
  nn::require_shape(qv, {dv}, "attention query");
  Tensor out({batch, dv});
  Tensor alpha({batch, m});
  for (std::size_t b = 0; b < batch; ++b)
    attend_one(c.ptr() + b * m * dv, m, dv, qv.ptr(), out.ptr() + b * dv, alpha.ptr() + b * m);
  return g.record(std::move(out), {cv, q}, [=, alpha = std::move(alpha)](nn::Graph& gr, const Tensor& gout) {
    const Tensor& cvv = gr.value(cv);
    const Tensor& qq = gr.value(q);
    Tensor* gcv = gr.needs_grad(cv) ? &gr.grad(cv) : nullptr;
    Tensor* gq = gr.needs_grad(q) ? &gr.grad(q) : nullptr;
    std::vector<double> ga(m), ge(m);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* cb = cvv.ptr() + b * m * dv;
      const double* go = gout.ptr() + b * dv;
      const double* al = alpha.ptr() + b * m;
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < dv; ++k) acc += go[k] * cb[i * dv + k];
        ga[i] = acc;
        dot += al[i] * acc;
      }
      for (std::size_t i = 0; i < m; ++i) ge[i] = al[i] * (ga[i] - dot);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < dv; ++k) {
          if (gcv) gcv->ptr()[(b * m + i) * dv + k] += al[i] * go[k] + ge[i] * qq[k];
          if (gq) (*gq)[k] += ge[i] * cb[i * dv + k];
        }
    }
  });
}

}  // namespace hardc::model
