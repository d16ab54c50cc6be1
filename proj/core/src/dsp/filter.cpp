#include "hardc/dsp/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hardc/error.hpp"

namespace hardc::dsp {

namespace {

using cplx = std::complex<double>;

struct Zpk {
  std::vector<cplx> z;
  std::vector<cplx> p;
  double k = 1.0;
};

// Chebyshev II analog prototype with its stopband edge at 1 rad/s.
Zpk cheby2_prototype(int n, double rs) {
  const double de = 1.0 / std::sqrt(std::pow(10.0, 0.1 * rs) - 1.0);
  const double mu = std::asinh(1.0 / de) / n;
  Zpk out;
  std::vector<int> m;
  if (n % 2 == 1) {
    for (int i = -n + 1; i < 0; i += 2) m.push_back(i);
    for (int i = 2; i < n; i += 2) m.push_back(i);
  } else {
    for (int i = -n + 1; i < n; i += 2) m.push_back(i);
  }
  const double pi = std::numbers::pi;
  for (int mi : m) out.z.push_back(-std::conj(cplx(0.0, 1.0) / std::sin(mi * pi / (2.0 * n))));
  for (int i = -n + 1; i < n; i += 2) {
    const cplx base = -std::exp(cplx(0.0, pi * i / (2.0 * n)));
    const cplx pole(std::sinh(mu) * base.real(), std::cosh(mu) * base.imag());
    out.p.push_back(1.0 / pole);
  }
  cplx num(1.0), den(1.0);
  for (const auto& p : out.p) num *= -p;
  for (const auto& z : out.z) den *= -z;
  out.k = (num / den).real();
  return out;
}

Zpk butter_prototype(int n) {
  Zpk out;
  const double pi = std::numbers::pi;
  for (int i = -n + 1; i < n; i += 2) out.p.push_back(-std::exp(cplx(0.0, pi * i / (2.0 * n))));
  out.k = 1.0;
  return out;
}

Zpk lowpass_to_bandpass(const Zpk& in, double wo, double bw) {
  const auto degree = static_cast<int>(in.p.size()) - static_cast<int>(in.z.size());
  auto transform = [&](const std::vector<cplx>& roots) {
    std::vector<cplx> lo, hi;
    for (const auto& r : roots) {
      const cplx scaled = r * (bw / 2.0);
      const cplx disc = std::sqrt(scaled * scaled - wo * wo);
      lo.push_back(scaled + disc);
      hi.push_back(scaled - disc);
    }
    lo.insert(lo.end(), hi.begin(), hi.end());
    return lo;
  };
  Zpk out;
  out.z = transform(in.z);
  out.p = transform(in.p);
  for (int i = 0; i < degree; ++i) out.z.emplace_back(0.0, 0.0);
  out.k = in.k * std::pow(bw, degree);
  return out;
}

// Bilinear transform at a normalised sample rate of 2.
Zpk bilinear(const Zpk& in) {
  const double fs2 = 4.0;
  const auto degree = static_cast<int>(in.p.size()) - static_cast<int>(in.z.size());
  Zpk out;
  cplx num(1.0), den(1.0);
  for (const auto& z : in.z) {
    out.z.push_back((fs2 + z) / (fs2 - z));
    num *= fs2 - z;
  }
  for (const auto& p : in.p) {
    out.p.push_back((fs2 + p) / (fs2 - p));
    den *= fs2 - p;
  }
  for (int i = 0; i < degree; ++i) out.z.emplace_back(-1.0, 0.0);
  out.k = in.k * (num / den).real();
  return out;
}

std::vector<double> poly(const std::vector<cplx>& roots) {
  std::vector<cplx> c{cplx(1.0)};
  for (const auto& r : roots) {
    std::vector<cplx> next(c.size() + 1, cplx(0.0));
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= c[i] * r;
    }
    c = std::move(next);
  }
  std::vector<double> out(c.size());
  std::transform(c.begin(), c.end(), out.begin(), [](const cplx& v) { return v.real(); });
  return out;
}

// Roots grouped two at a time: conjugate pairs, then the real roots in
// sorted order. An odd real root is paired with a root at the origin.
std::vector<std::array<cplx, 2>> root_pairs(std::vector<cplx> roots) {
  std::vector<std::array<cplx, 2>> out;
  std::vector<double> reals;
  std::vector<cplx> upper;
  for (const auto& r : roots) {
    if (std::abs(r.imag()) <= 1e-12 * std::max(1.0, std::abs(r)))
      reals.push_back(r.real());
    else if (r.imag() > 0.0)
      upper.push_back(r);
  }
  std::sort(upper.begin(), upper.end(), [](cplx x, cplx y) { return std::abs(x) < std::abs(y); });
  for (const auto& r : upper) out.push_back({r, std::conj(r)});
  std::sort(reals.begin(), reals.end());
  if (reals.size() % 2 == 1) reals.push_back(0.0);
  for (std::size_t i = 0; i < reals.size(); i += 2) out.push_back({cplx(reals[i]), cplx(reals[i + 1])});
  return out;
}

std::array<double, 3> quadratic(const std::array<cplx, 2>& r) {
  return {1.0, -(r[0] + r[1]).real(), (r[0] * r[1]).real()};
}

// Pole pairs nearest the unit circle pick their nearest zero pair first;
// a poor match there amplifies rounding by 1/(1-|p|)^2. Sections are then
// emitted innermost first so the sharpest ones run last.
std::vector<Biquad> to_sections(const Zpk& digital) {
  auto zeros = root_pairs(digital.z);
  auto poles = root_pairs(digital.p);
  auto radius = [](const std::array<cplx, 2>& r) { return std::max(std::abs(r[0]), std::abs(r[1])); };
  std::stable_sort(poles.begin(), poles.end(), [&](const auto& x, const auto& y) { return radius(x) < radius(y); });
  while (zeros.size() < poles.size()) zeros.push_back({cplx(0.0), cplx(0.0)});
  if (zeros.size() > poles.size()) return {};
  std::vector<Biquad> out;
  std::vector<bool> used(zeros.size(), false);
  for (auto it = poles.rbegin(); it != poles.rend(); ++it) {
    const auto& p = *it;
    std::size_t best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < zeros.size(); ++i)
      if (!used[i] && std::abs(zeros[i][0] - p[0]) < dist) dist = std::abs(zeros[i][0] - p[0]), best = i;
    used[best] = true;
    out.push_back({quadratic(zeros[best]), quadratic(p)});
  }
  std::reverse(out.begin(), out.end());
  for (auto& v : out.front().b) v *= digital.k;
  return out;
}

FilterCoeffs to_coeffs(const Zpk& digital, int order, FilterKind kind) {
  FilterCoeffs c;
  c.b = poly(digital.z);
  for (auto& v : c.b) v *= digital.k;
  c.a = poly(digital.p);
  c.sections = to_sections(digital);
  c.order = order;
  c.kind = kind;
  if (!is_stable(c)) throw UnstableDesign("designed filter has poles on or outside the unit circle");
  return c;
}

void check_band(double fs, double f_lo, double f_hi) {
  if (!(fs > 0.0)) throw InvalidBand("sampling rate must be positive");
  if (!(f_lo > 0.0 && f_lo < f_hi && f_hi < fs / 2.0))
    throw InvalidBand("require 0 < f_lo < f_hi < fs/2");
}

// Pre-warped analog edge for a digital frequency, on the fs=2 normalisation.
double warp(double f, double fs) {
  const double wn = 2.0 * f / fs;
  return 4.0 * std::tan(std::numbers::pi * wn / 2.0);
}

}  // namespace

FilterCoeffs design_cheby2_bandpass(double fs, double f_lo, double f_hi, int order, double stop_atten_db) {
  check_band(fs, f_lo, f_hi);
  if (order < 2 || order % 2 != 0) throw InvalidBand("order must be even and at least 2");
  if (!(stop_atten_db > 0.0)) throw InvalidBand("stopband attenuation must be positive");

  // The prototype's -3 dB point sits at 1/ws of its stopband edge, so widening
  // the band-pass bandwidth by ws lands the -3 dB points on f_lo and f_hi.
  const double de = 1.0 / std::sqrt(std::pow(10.0, 0.1 * stop_atten_db) - 1.0);
  const double ws = std::cosh(std::acosh(1.0 / de) / order);
  const double lo = warp(f_lo, fs);
  const double hi = warp(f_hi, fs);
  const Zpk analog = lowpass_to_bandpass(cheby2_prototype(order, stop_atten_db), std::sqrt(lo * hi), (hi - lo) * ws);
  return to_coeffs(bilinear(analog), order, FilterKind::cheby2_bandpass);
}

FilterCoeffs design_butter_bandpass(double fs, double f_lo, double f_hi, int order) {
  check_band(fs, f_lo, f_hi);
  if (order < 1) throw InvalidBand("order must be at least 1");
  const double lo = warp(f_lo, fs);
  const double hi = warp(f_hi, fs);
  const Zpk analog = lowpass_to_bandpass(butter_prototype(order), std::sqrt(lo * hi), hi - lo);
  return to_coeffs(bilinear(analog), order, FilterKind::butter_bandpass);
}

// Roots of a real polynomial with descending coefficients (Durand-Kerner).
std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs) {
  std::size_t first = 0;
  while (first < coeffs.size() && coeffs[first] == 0.0) ++first;
  const std::size_t degree = coeffs.size() - first - 1;
  std::vector<cplx> roots(degree);
  if (degree == 0) return roots;
  std::vector<cplx> monic(degree + 1);
  for (std::size_t i = 0; i <= degree; ++i) monic[i] = coeffs[first + i] / coeffs[first];
  double radius = 0.0;
  for (std::size_t i = 1; i <= degree; ++i) radius = std::max(radius, std::abs(monic[i]));
  radius = 1.0 + radius;
  const cplx seed(0.4, 0.9);
  for (std::size_t i = 0; i < degree; ++i) roots[i] = std::pow(seed, static_cast<double>(i)) * (radius / 2.0);
  for (int iter = 0; iter < 2000; ++iter) {
    double delta = 0.0;
    for (std::size_t i = 0; i < degree; ++i) {
      cplx value = monic[0];
      for (std::size_t k = 1; k <= degree; ++k) value = value * roots[i] + monic[k];
      cplx denom(1.0);
      for (std::size_t j = 0; j < degree; ++j)
        if (j != i) denom *= roots[i] - roots[j];
      const cplx step = value / denom;
      roots[i] -= step;
      delta = std::max(delta, std::abs(step));
    }
    if (delta < 1e-15) break;
  }
  return roots;
}

std::vector<std::complex<double>> poles(const FilterCoeffs& c) { return polynomial_roots(c.a); }

bool is_stable(const FilterCoeffs& c) {
  if (c.a.empty() || c.a[0] == 0.0) return false;
  for (const auto& p : poles(c))
    if (!(std::abs(p) < 1.0)) return false;
  return true;
}

std::complex<double> frequency_response(const FilterCoeffs& c, double f, double fs) {
  const cplx zinv = std::exp(cplx(0.0, -2.0 * std::numbers::pi * f / fs));
  auto eval = [&](const std::vector<double>& coeffs) {
    cplx acc(0.0), power(1.0);
    for (double v : coeffs) {
      acc += v * power;
      power *= zinv;
    }
    return acc;
  };
  return eval(c.b) / eval(c.a);
}

std::vector<double> lfilter(const FilterCoeffs& c, std::span<const double> x, std::span<const double> zi) {
  const std::size_t n = std::max(c.a.size(), c.b.size());
  std::vector<double> b(n, 0.0), a(n, 0.0);
  std::copy(c.b.begin(), c.b.end(), b.begin());
  std::copy(c.a.begin(), c.a.end(), a.begin());
  const double a0 = a[0];
  for (auto& v : b) v /= a0;
  for (auto& v : a) v /= a0;

  std::vector<double> state(n - 1, 0.0);
  if (!zi.empty()) {
    if (zi.size() != state.size()) throw ShapeMismatch("lfilter initial state has wrong length");
    std::copy(zi.begin(), zi.end(), state.begin());
  }
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double yi = b[0] * xi + (state.empty() ? 0.0 : state[0]);
    for (std::size_t k = 1; k + 1 < n; ++k) state[k - 1] = state[k] + b[k] * xi - a[k] * yi;
    if (n > 1) state[n - 2] = b[n - 1] * xi - a[n - 1] * yi;
    y[i] = yi;
  }
  return y;
}

std::vector<double> lfilter_zi(const FilterCoeffs& c) {
  const std::size_t n = std::max(c.a.size(), c.b.size());
  std::vector<double> b(n, 0.0), a(n, 0.0);
  std::copy(c.b.begin(), c.b.end(), b.begin());
  std::copy(c.a.begin(), c.a.end(), a.begin());
  for (auto& v : b) v /= c.a[0];
  for (auto& v : a) v /= c.a[0];
  const std::size_t m = n - 1;
  if (m == 0) return {};

  // Solve (I - A^T) zi = b[1:] - a[1:] * b[0], A the companion matrix of a.
  std::vector<std::vector<double>> mat(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    mat[i][i] = 1.0;
    mat[i][0] += a[i + 1];  // -(companion^T)[i][0] == a[i+1]
    if (i + 1 < m) mat[i][i + 1] -= 1.0;
    mat[i][m] = b[i + 1] - a[i + 1] * b[0];
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(mat[r][col]) > std::abs(mat[pivot][col])) pivot = r;
    std::swap(mat[col], mat[pivot]);
    if (mat[col][col] == 0.0) throw UnstableDesign("singular system while computing filter initial state");
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = mat[r][col] / mat[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k <= m; ++k) mat[r][k] -= f * mat[col][k];
    }
  }
  std::vector<double> zi(m);
  for (std::size_t i = 0; i < m; ++i) zi[i] = mat[i][m] / mat[i][i];
  return zi;
}

std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x, std::span<const double> zi) {
  if (!zi.empty() && zi.size() != 2 * sections.size()) throw ShapeMismatch("sosfilt initial state has wrong length");
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const auto& [b, a] = sections[s];
    double z1 = zi.empty() ? 0.0 : zi[2 * s], z2 = zi.empty() ? 0.0 : zi[2 * s + 1];
    for (auto& v : y) {
      const double in = v;
      const double out = b[0] * in + z1;
      z1 = b[1] * in - a[1] * out + z2;
      z2 = b[2] * in - a[2] * out;
      v = out;
    }
  }
  return y;
}

std::vector<double> sosfilt_zi(std::span<const Biquad> sections) {
  std::vector<double> zi;
  double scale = 1.0;
  for (const auto& s : sections) {
    FilterCoeffs one;
    one.b.assign(s.b.begin(), s.b.end());
    one.a.assign(s.a.begin(), s.a.end());
    for (double v : lfilter_zi(one)) zi.push_back(scale * v);
    scale *= (s.b[0] + s.b[1] + s.b[2]) / (s.a[0] + s.a[1] + s.a[2]);
  }
  return zi;
}

std::size_t filtfilt_padlen(const FilterCoeffs& c) { return 3 * std::max(c.a.size(), c.b.size()); }

std::vector<double> filtfilt(const FilterCoeffs& c, std::span<const double> x) {
  const std::size_t pad = filtfilt_padlen(c);
  if (x.size() <= pad)
    throw SignalTooShort("filtfilt needs more than " + std::to_string(pad) + " samples, got " +
                         std::to_string(x.size()));
  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const bool cascade = !c.sections.empty();
  const auto zi = cascade ? sosfilt_zi(c.sections) : lfilter_zi(c);
  auto run = [&](std::span<const double> in) {
    std::vector<double> z0(zi.size());
    for (std::size_t i = 0; i < zi.size(); ++i) z0[i] = zi[i] * in.front();
    return cascade ? sosfilt(c.sections, in, z0) : lfilter(c, in, z0);
  };
  auto y = run(ext);
  std::reverse(y.begin(), y.end());
  y = run(y);
  std::reverse(y.begin(), y.end());
  return {y.begin() + static_cast<std::ptrdiff_t>(pad), y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

io::Signal filtfilt(const FilterCoeffs& c, const io::Signal& x) { return {filtfilt(c, x.samples), x.fs}; }

}  // namespace hardc::dsp
