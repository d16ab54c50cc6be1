#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cli/cli.hpp"
#include "hardc/dsp/filter.hpp"
#include "hardc/dsp/qrs.hpp"
#include "hardc/dsp/wavelet.hpp"
#include "hardc/gan/cgan.hpp"
#include "hardc/io/synthetic.hpp"
#include "hardc/metrics/metrics.hpp"
#include "hardc/model/hardc.hpp"
#include "hardc/model/routing.hpp"
#include "hardc/model/train.hpp"
#include "hardc/nn/blob.hpp"
#include "hardc/nn/gradcheck.hpp"
#include "hardc/nn/kernels.hpp"
#include "hardc/nn/layers.hpp"

namespace hardc::cli {

namespace {

// Each check returns an empty string on success, otherwise what went wrong.
using Check = std::function<std::string()>;

std::string expect(bool cond, const std::string& what) { return cond ? std::string{} : what; }

std::string check_softmax() {
  const nn::Tensor p = nn::softmax(nn::Tensor({1, 3}, {1.0, 2.0, 3.0}));
  const nn::Tensor q = nn::softmax(nn::Tensor({1, 3}, {101.0, 102.0, 103.0}));
  double sum = 0, shift = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    sum += p[i];
    shift = std::max(shift, std::abs(p[i] - q[i]));
  }
  return expect(std::abs(sum - 1) < 1e-12 && shift < 1e-12 && std::abs(p[2] - 0.6652409557748219) < 1e-12,
                "softmax values off");
}

std::string check_cross_entropy() {
  const std::vector<double> p{0.7, 0.2, 0.1};
  return expect(std::abs(nn::cross_entropy(p, 0) - 0.35667494393873245) < 1e-12, "cross entropy off");
}

std::string check_filter() {
  const auto c = dsp::design_cheby2_bandpass(360, 0.5, 48, 4, 40);
  if (!dsp::is_stable(c)) return "band-pass design unstable";
  const double mid = std::abs(dsp::frequency_response(c, 10, 360));
  const double stop = std::abs(dsp::frequency_response(c, 120, 360));
  return expect(std::abs(mid - 1) < 0.05 && 20 * std::log10(stop) <= -40 + 1e-6, "band-pass response off");
}

std::string check_wavelet() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  dsp::WaveletSpec spec;
  spec.vanishing_moments = 6;
  spec.levels = 5;
  for (std::size_t n : {97u, 256u, 1000u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = nd(rng);
    const auto y = dsp::waverec(dsp::wavedec(x, spec), spec);
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(x[i] - y[i]) > 1e-8) return "reconstruction error at length " + std::to_string(n);
  }
  return {};
}

std::string check_peaks() {
  io::SyntheticEcgParams p;
  p.seed = 4;
  const auto rec = io::synthetic_ecg(p);
  const auto peaks = dsp::pan_tompkins(rec.record.signal);
  if (peaks.size() != rec.r_peaks.size()) return "found " + std::to_string(peaks.size()) + " peaks";
  for (std::size_t i = 0; i < peaks.size(); ++i)
    if (std::abs(static_cast<long>(peaks[i]) - static_cast<long>(rec.r_peaks[i])) > 2) return "peak off by > 2";
  return {};
}

std::string check_routing() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  nn::Tensor rv({7, 4}), w({5, 4, 3}), q({3});
  for (auto* t : {&rv, &w, &q})
    for (std::size_t i = 0; i < t->size(); ++i) (*t)[i] = u(rng);
  std::vector<model::RoutingState> trace;
  const nn::Tensor cv = model::routing(rv, w, 3, &trace);
  for (const auto& s : trace)
    for (std::size_t i = 0; i < 7; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < 5; ++j) row += s.c.at(i, j);
      if (std::abs(row - 1) > 1e-12) return "coupling row does not sum to 1";
    }
  for (std::size_t j = 0; j < 5; ++j) {
    double n2 = 0;
    for (std::size_t k = 0; k < 3; ++k) n2 += cv.at(j, k) * cv.at(j, k);
    if (std::sqrt(n2) >= 1) return "target vector norm >= 1";
  }
  nn::Tensor alpha;
  model::attention_aggregate(cv, q, &alpha);
  double a = 0;
  for (std::size_t j = 0; j < alpha.size(); ++j) a += alpha[j];
  return expect(std::abs(a - 1) < 1e-12, "attention weights do not sum to 1");
}

std::string check_gradients() {
  model::ModelSpec s;
  s.segment_len = 16;
  s.rnn_units_block1 = s.rnn_units_block2 = 2;
  s.conv_blocks = 2;
  s.kernel_width = 2;
  s.filters = 3;
  s.target_convs = 5;
  s.attention_dim = 4;
  model::Model m(s, 1);
  const auto ds = io::toy_separable_beats(6, 16, 3);
  std::vector<std::size_t> idx(6);
  std::iota(idx.begin(), idx.end(), 0);
  const auto x = model::beats_tensor(ds, idx);
  const auto y = model::label_indices(ds, idx);
  nn::GradCheckOptions opts;
  opts.max_entries = 8;
  const auto r = nn::check_gradients(
      m.trainable(), [&](nn::Graph& g) { return nn::ops::cross_entropy(g, m.forward(g, x), y); }, opts);
  return expect(r.max_rel_error < 1e-4, "relative error " + std::to_string(r.max_rel_error) + " at " + r.worst);
}

std::string check_receptive_field() {
  for (auto [w, l] : {std::pair{2, 1}, std::pair{5, 2}, std::pair{8, 3}}) {
    model::ModelSpec s;
    s.kernel_width = static_cast<std::size_t>(w);
    s.conv_blocks = static_cast<std::size_t>(l);
    const std::size_t want = static_cast<std::size_t>((w - 1) * (1 << (l - 1)) + 1);
    if (model::measure_receptive_field(s) != want) return "w=" + std::to_string(w) + " L=" + std::to_string(l);
  }
  return {};
}

std::string check_metrics() {
  const auto m = metrics::metrics_from_counts(8, 2, 2, 88);
  return expect(std::abs(m.accuracy - 0.96) < 1e-12 && std::abs(m.precision - 0.8) < 1e-12 &&
                    std::abs(m.recall - 0.8) < 1e-12 && std::abs(m.f1 - 0.8) < 1e-12,
                "metrics off");
}

std::string check_gan_losses() {
  const std::vector<double> half(4, 0.5);
  const auto l = gan::gan_losses(half, half);
  return expect(std::abs(l.d - 2 * std::log(2.0)) < 1e-12, "loss_d at D=0.5 is not 2 ln 2");
}

std::string check_blob() {
  nn::NamedTensors t{{"a", nn::Tensor({2, 3}, {1, 2, 3, 4, 5, 6})}, {"b", nn::Tensor({1}, {0.25})}};
  const auto back = nn::decode_blob(nn::encode_blob(t));
  return expect(back.size() == 2 && back[0].first == "a" && back[0].second.shape() == t[0].second.shape() &&
                    back[0].second[5] == 6 && back[1].second[0] == 0.25,
                "blob round trip mismatch");
}

}  // namespace

int run_selftest(std::ostream& out) {
  const std::vector<std::pair<const char*, Check>> checks{
      {"softmax", check_softmax},
      {"cross_entropy", check_cross_entropy},
      {"bandpass_design", check_filter},
      {"wavelet_round_trip", check_wavelet},
      {"r_peaks", check_peaks},
      {"routing_invariants", check_routing},
      {"model_gradients", check_gradients},
      {"receptive_field", check_receptive_field},
      {"metrics", check_metrics},
      {"gan_losses", check_gan_losses},
      {"blob_round_trip", check_blob},
  };
  int failures = 0;
  for (const auto& [name, check] : checks) {
    std::string msg;
    try {
      msg = check();
    } catch (const std::exception& e) {
      msg = e.what();
    }
    if (msg.empty()) {
      out << "ok   " << name << "\n";
    } else {
      out << "FAIL " << name << ": " << msg << "\n";
      ++failures;
    }
  }
  out << (failures ? std::to_string(failures) + " check(s) failed\n" : "all checks passed\n");
  return failures;
}

}  // namespace hardc::cli
