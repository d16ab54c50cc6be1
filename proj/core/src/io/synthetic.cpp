#include "hardc/io/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "hardc/error.hpp"

namespace hardc::io {

namespace {

struct Wave {
  double at_s, sigma_s, amp;
};

std::vector<Wave> beat_shape(ClassLabel c) {
  switch (c) {
    case ClassLabel::N:
      return {{-0.20, 0.025, 0.12}, {-0.03, 0.008, -0.12}, {0.0, 0.010, 1.0}, {0.03, 0.008, -0.20}, {0.25, 0.045, 0.30}};
    case ClassLabel::FN:
      return {{-0.20, 0.025, 0.08}, {-0.03, 0.010, -0.08}, {0.0, 0.014, 0.80}, {0.035, 0.010, -0.25}, {0.26, 0.050, 0.20}};
    case ClassLabel::PVC:
      return {{0.0, 0.025, 1.20}, {0.06, 0.020, -0.30}, {0.28, 0.060, -0.35}};
    case ClassLabel::AP:
      return {{-0.14, 0.020, -0.15}, {-0.03, 0.008, -0.10}, {0.0, 0.010, 0.95}, {0.03, 0.008, -0.18}, {0.24, 0.045, 0.28}};
    case ClassLabel::FVN:
      return {{-0.20, 0.025, 0.06}, {0.0, 0.018, 0.90}, {0.05, 0.015, -0.30}, {0.27, 0.055, -0.20}};
  }
  return {};
}

}  // namespace

std::vector<ClassLabel> mixed_class_pattern() {
  using enum ClassLabel;
  return {N, N, FN, N, PVC, N, N, AP, N, FVN, N, N};
}

SyntheticRecord synthetic_ecg(const SyntheticEcgParams& p) {
  if (p.fs <= 0.0 || p.bpm <= 0.0 || p.pattern.empty()) throw SpecError("synthetic ECG needs fs, bpm and a pattern");
  const double rr = 60.0 / p.bpm;
  const auto lead = static_cast<std::size_t>(std::lround(p.lead_in_s * p.fs));
  const auto step = static_cast<std::size_t>(std::lround(rr * p.fs));
  const std::size_t n = lead + (p.beats - (p.beats ? 1 : 0)) * step + static_cast<std::size_t>(std::lround(p.tail_s * p.fs)) + 1;
  SyntheticRecord out;
  out.record.signal.fs = p.fs;
  auto& x = out.record.signal.samples;
  x.assign(n, 0.0);
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t b = 0; b < p.beats; ++b) {
    const std::size_t r = lead + b * step;
    const ClassLabel cls = p.pattern[b % p.pattern.size()];
    out.r_peaks.push_back(r);
    out.record.annotations.push_back({r, cls});
    for (const auto& w : beat_shape(cls)) {
      const double centre = static_cast<double>(r) + w.at_s * p.fs;
      const double sig = w.sigma_s * p.fs;
      const auto lo = static_cast<long>(std::floor(centre - 6.0 * sig));
      const auto hi = static_cast<long>(std::ceil(centre + 6.0 * sig));
      for (long i = std::max(0L, lo); i <= hi && i < static_cast<long>(n); ++i) {
        const double d = (static_cast<double>(i) - centre) / sig;
        x[static_cast<std::size_t>(i)] += w.amp * std::exp(-0.5 * d * d);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    x[i] += p.wander_amp * std::sin(2.0 * std::numbers::pi * 0.3 * static_cast<double>(i) / p.fs) +
            p.noise_sd * noise(rng);
  return out;
}

ConstructedQrs constructed_qrs_beats(std::size_t beats, double fs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> half_width(0.030, 0.050);
  const auto step = static_cast<std::size_t>(std::lround(0.8 * fs));
  const auto lead = static_cast<std::size_t>(std::lround(0.6 * fs));
  const std::size_t n = lead + beats * step + static_cast<std::size_t>(std::lround(0.6 * fs));
  ConstructedQrs out;
  out.signal.fs = fs;
  auto& x = out.signal.samples;
  x.assign(n, 0.0);
  for (std::size_t b = 0; b < beats; ++b) {
    const std::size_t r = lead + b * step;
    const auto a = static_cast<std::size_t>(std::lround(half_width(rng) * fs));
    const auto c = static_cast<std::size_t>(std::lround(half_width(rng) * fs));
    out.r_peaks.push_back(r);
    out.onsets.push_back(r - a);
    out.offsets.push_back(r + c);
    for (std::size_t i = r - a; i <= r; ++i) x[i] = static_cast<double>(i - (r - a)) / static_cast<double>(a);
    for (std::size_t i = r; i <= r + c; ++i) x[i] = static_cast<double>(r + c - i) / static_cast<double>(c);
    for (const auto& w : {Wave{-0.22, 0.025, 0.12}, Wave{0.30, 0.045, 0.30}}) {
      const double centre = static_cast<double>(r) + w.at_s * fs;
      const double sig = w.sigma_s * fs;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (static_cast<double>(i) - centre) / sig;
        if (std::abs(d) < 6.0) x[i] += w.amp * std::exp(-0.5 * d * d);
      }
    }
  }
  return out;
}

BeatDataset toy_separable_beats(std::size_t n, std::size_t segment_len, std::uint64_t seed, double noise_sd) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp(0.9, 1.1);
  std::normal_distribution<double> noise(0.0, noise_sd);
  BeatDataset ds(segment_len);
  std::vector<double> beat(segment_len);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % kNumClasses;
    const double ph = phase(rng), a = amp(rng);
    for (std::size_t t = 0; t < segment_len; ++t)
      beat[t] = a * std::sin(2.0 * std::numbers::pi * static_cast<double>(c + 1) * static_cast<double>(t) /
                                 static_cast<double>(segment_len) + ph) +
                noise(rng);
    ds.push_back(beat, static_cast<ClassLabel>(c));
  }
  return ds;
}

}  // namespace hardc::io
