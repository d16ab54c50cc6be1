#include "hardc/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hardc::nn {

GradCheckResult check_gradients(const std::vector<Parameter*>& params, const LossBuilder& build,
                                const GradCheckOptions& opts) {
  auto loss_value = [&] {
    Graph g(opts.mode, opts.graph_seed);
    g.set_grad_enabled(false);
    return g.value(build(g)).item();
  };
  for (auto* p : params) p->zero_grad();
  {
    Graph g(opts.mode, opts.graph_seed);
    g.backward(build(g));
  }
  std::mt19937_64 rng(opts.seed);
  GradCheckResult res;
  for (auto* p : params) {
    std::vector<std::size_t> idx(p->value.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (opts.max_entries != 0 && idx.size() > opts.max_entries) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(opts.max_entries);
    }
    for (auto i : idx) {
      const double saved = p->value[i];
      p->value[i] = saved + opts.h;
      const double up = loss_value();
      p->value[i] = saved - opts.h;
      const double down = loss_value();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * opts.h);
      const double analytic = p->grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), opts.floor});
      const double err = std::abs(analytic - numeric) / denom;
      ++res.checked;
      if (err >= res.max_rel_error) {
        res.max_rel_error = err;
        res.worst = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return res;
}

}  // namespace hardc::nn
