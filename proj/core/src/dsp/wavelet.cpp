#include "hardc/dsp/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numeric>

#include "hardc/dsp/filter.hpp"
#include "hardc/error.hpp"

namespace hardc::dsp {

namespace {

using cplx = std::complex<double>;

void check_spec(const WaveletSpec& spec) {
  if (spec.vanishing_moments < 1) throw SpecError("wavelet needs at least one vanishing moment");
  if (spec.levels < 1) throw SpecError("wavelet needs at least one decomposition level");
}

struct FilterBank {
  std::vector<double> lo;  // scaling filter
  std::vector<double> hi;  // wavelet filter, hi[n] = (-1)^n lo[F-1-n]
};

const FilterBank& filter_bank(int moments) {
  static std::mutex mu;
  static std::map<int, FilterBank> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(moments);
  if (it != cache.end()) return it->second;
  FilterBank fb;
  fb.lo = daubechies_scaling_filter(moments);
  const std::size_t f = fb.lo.size();
  fb.hi.resize(f);
  for (std::size_t n = 0; n < f; ++n) fb.hi[n] = (n % 2 == 0 ? 1.0 : -1.0) * fb.lo[f - 1 - n];
  return cache.emplace(moments, std::move(fb)).first->second;
}

void analyse(std::span<const double> x, const FilterBank& fb, std::vector<double>& approx,
             std::vector<double>& detail) {
  const std::size_t len = x.size();
  const std::size_t half = len / 2;
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t n = 0; n < fb.lo.size(); ++n) {
      const double v = x[(2 * k + n) % len];
      a += fb.lo[n] * v;
      d += fb.hi[n] * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

std::vector<double> synthesise(std::span<const double> approx, std::span<const double> detail, const FilterBank& fb) {
  const std::size_t len = 2 * approx.size();
  std::vector<double> x(len, 0.0);
  for (std::size_t k = 0; k < approx.size(); ++k)
    for (std::size_t n = 0; n < fb.lo.size(); ++n) x[(2 * k + n) % len] += fb.lo[n] * approx[k] + fb.hi[n] * detail[k];
  return x;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

std::vector<double> daubechies_polynomial(int vanishing_moments) {
  if (vanishing_moments < 1) throw SpecError("wavelet needs at least one vanishing moment");
  const int n = vanishing_moments;
  std::vector<double> coeffs(static_cast<std::size_t>(n));
  double c = 1.0;  // C(N-1+k, k)
  for (int k = 0; k < n; ++k) {
    coeffs[static_cast<std::size_t>(k)] = c;
    c = c * (n + k) / (k + 1);
  }
  return coeffs;
}

std::vector<double> daubechies_scaling_filter(int vanishing_moments) {
  const auto p = daubechies_polynomial(vanishing_moments);
  std::vector<double> descending(p.rbegin(), p.rend());
  const auto y_roots = polynomial_roots(descending);

  // Each root y of P_N maps to a reciprocal pair z, 1/z through
  // y = (2 - z - 1/z) / 4; keeping |z| < 1 gives the minimum-phase factor.
  std::vector<cplx> poly{cplx(1.0)};
  auto multiply = [&](cplx root) {
    std::vector<cplx> next(poly.size() + 1, cplx(0.0));
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= poly[i] * root;
    }
    poly = std::move(next);
  };
  for (const auto& y : y_roots) {
    const cplx b = 4.0 * y - 2.0;
    const cplx disc = std::sqrt(b * b - 4.0);
    cplx z = (-b + disc) / 2.0;
    if (std::abs(z) > 1.0) z = (-b - disc) / 2.0;
    multiply(z);
  }
  for (int i = 0; i < vanishing_moments; ++i) multiply(cplx(-1.0));

  std::vector<double> h(poly.size());
  std::transform(poly.begin(), poly.end(), h.begin(), [](const cplx& v) { return v.real(); });
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (auto& v : h) v *= std::sqrt(2.0) / sum;
  return h;
}

WaveletDecomposition wavedec(std::span<const double> x, const WaveletSpec& spec) {
  check_spec(spec);
  const std::size_t block = std::size_t{1} << spec.levels;
  if (x.size() < block)
    throw SignalTooShort(std::to_string(spec.levels) + " levels need at least " + std::to_string(block) +
                         " samples, got " + std::to_string(x.size()));
  const auto& fb = filter_bank(spec.vanishing_moments);

  WaveletDecomposition dec;
  dec.original_length = x.size();
  dec.padded_length = (x.size() + block - 1) / block * block;

  // Half-sample symmetric extension on the right up to the padded length.
  std::vector<double> current(x.begin(), x.end());
  const std::size_t n = x.size();
  for (std::size_t i = n; i < dec.padded_length; ++i) {
    const std::size_t period = 2 * n;
    const std::size_t m = i % period;
    current.push_back(m < n ? x[m] : x[period - 1 - m]);
  }

  std::vector<double> approx, detail;
  for (int level = 0; level < spec.levels; ++level) {
    analyse(current, fb, approx, detail);
    dec.details.push_back(detail);
    current = approx;
  }
  dec.approx = std::move(current);
  return dec;
}

std::vector<double> waverec(const WaveletDecomposition& dec, const WaveletSpec& spec) {
  check_spec(spec);
  if (dec.details.size() != static_cast<std::size_t>(spec.levels))
    throw ShapeMismatch("decomposition level count does not match the wavelet spec");
  const auto& fb = filter_bank(spec.vanishing_moments);
  std::vector<double> current = dec.approx;
  for (auto level = dec.details.size(); level-- > 0;) {
    if (dec.details[level].size() != current.size()) throw ShapeMismatch("detail band length mismatch");
    current = synthesise(current, dec.details[level], fb);
  }
  current.resize(dec.original_length);
  return current;
}

double universal_threshold(const WaveletDecomposition& dec) {
  if (dec.details.empty()) return 0.0;
  std::vector<double> mags(dec.details.front().size());
  std::transform(dec.details.front().begin(), dec.details.front().end(), mags.begin(),
                 [](double v) { return std::abs(v); });
  const double sigma = median(std::move(mags)) / 0.6745;
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(dec.original_length)));
}

std::vector<double> dwt_denoise(std::span<const double> x, const WaveletSpec& spec) {
  auto dec = wavedec(x, spec);
  if (spec.threshold_rule == ThresholdRule::soft_universal) {
    const double lambda = universal_threshold(dec);
    for (auto& band : dec.details)
      for (auto& v : band) v = std::copysign(std::max(std::abs(v) - lambda, 0.0), v);
  }
  return waverec(dec, spec);
}

io::Signal dwt_denoise(const io::Signal& x, const WaveletSpec& spec) { return {dwt_denoise(x.samples, spec), x.fs}; }

}  // namespace hardc::dsp
