#include "hardc/dsp/qrs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "hardc/dsp/filter.hpp"
#include "hardc/error.hpp"

namespace hardc::dsp {

namespace {

std::size_t samples_for(double seconds, double fs) {
  return static_cast<std::size_t>(std::lround(seconds * fs));
}

std::vector<double> centered_moving_average(const std::vector<double>& x, std::size_t window) {
  const std::size_t n = x.size();
  if (window <= 1 || n == 0) return x;
  const std::size_t half = window / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

// Five-point derivative, centered so it adds no delay.
std::vector<double> five_point_derivative(const std::vector<double>& x, double fs) {
  const std::size_t n = x.size();
  auto at = [&](std::ptrdiff_t i) {
    return x[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1))];
  };
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::ptrdiff_t>(i);
    d[i] = fs / 8.0 * (-at(k - 2) - 2.0 * at(k - 1) + 2.0 * at(k + 1) + at(k + 2));
  }
  return d;
}

std::vector<std::size_t> local_maxima(const std::vector<double>& x) {
  std::vector<std::size_t> out;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i] > x[i - 1]) {
      std::size_t j = i;
      while (j + 1 < n && x[j + 1] == x[i]) ++j;  // plateau
      if (j + 1 < n && x[j + 1] < x[i]) out.push_back((i + j) / 2);
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

struct Detector {
  double spki = 0.0;
  double npki = 0.0;
  double threshold() const { return npki + 0.25 * (spki - npki); }
};

}  // namespace

std::vector<std::size_t> pan_tompkins(const io::Signal& x, const PanTompkinsParams& params) {
  const double fs = x.fs;
  if (fs < 100.0) throw SignalTooShort("Pan-Tompkins needs fs >= 100 Hz");
  const std::size_t n = x.size();
  if (static_cast<double>(n) < 2.0 * fs)
    throw SignalTooShort("Pan-Tompkins needs at least 2 s of signal, got " + std::to_string(n) + " samples");

  const auto band = design_butter_bandpass(fs, params.band_lo_hz, params.band_hi_hz, 1);
  const auto filtered = filtfilt(band, x.samples);
  const auto deriv = five_point_derivative(filtered, fs);
  std::vector<double> squared(n);
  std::transform(deriv.begin(), deriv.end(), squared.begin(), [](double v) { return v * v; });
  const auto mwi = centered_moving_average(squared, samples_for(params.integration_window_s, fs));

  const std::size_t learn = std::min(n, samples_for(2.0, fs));
  const double learn_max = *std::max_element(mwi.begin(), mwi.begin() + static_cast<std::ptrdiff_t>(learn));
  const double global_max = *std::max_element(mwi.begin(), mwi.end());
  if (!(global_max > 0.0) || !std::isfinite(global_max)) return {};

  Detector det;
  det.spki = 0.25 * learn_max;
  det.npki = 0.5 * std::accumulate(mwi.begin(), mwi.begin() + static_cast<std::ptrdiff_t>(learn), 0.0) /
             static_cast<double>(learn);

  const std::size_t refractory = samples_for(params.refractory_s, fs);
  const std::size_t t_window = samples_for(params.t_wave_window_s, fs);
  const std::size_t half_window = samples_for(params.integration_window_s, fs) / 2;

  auto max_slope_near = [&](std::size_t p) {
    const std::size_t lo = p >= half_window ? p - half_window : 0;
    const std::size_t hi = std::min(n, p + half_window + 1);
    double best = 0.0;
    for (std::size_t i = lo; i < hi; ++i) best = std::max(best, std::abs(deriv[i]));
    return best;
  };

  std::vector<std::size_t> qrs;
  std::deque<std::size_t> rr;
  std::vector<std::size_t> noise_candidates;
  double last_slope = 0.0;

  auto accept = [&](std::size_t p, double weight) {
    det.spki = weight * mwi[p] + (1.0 - weight) * det.spki;
    if (!qrs.empty()) {
      rr.push_back(p - qrs.back());
      if (rr.size() > 8) rr.pop_front();
    }
    qrs.push_back(p);
    last_slope = max_slope_near(p);
    noise_candidates.clear();
  };

  for (std::size_t p : local_maxima(mwi)) {
    if (!qrs.empty() && p - qrs.back() < refractory) continue;

    // Search back for a missed beat once the gap grows past the usual RR.
    if (!qrs.empty() && !rr.empty()) {
      const double rr_mean = std::accumulate(rr.begin(), rr.end(), 0.0) / static_cast<double>(rr.size());
      if (static_cast<double>(p - qrs.back()) > params.searchback_factor * rr_mean) {
        const double thr2 = 0.5 * det.threshold();
        std::size_t best = n;
        for (std::size_t c : noise_candidates)
          if (mwi[c] > thr2 && (best == n || mwi[c] > mwi[best])) best = c;
        if (best != n) accept(best, 0.25);
      }
    }
    if (!qrs.empty() && p - qrs.back() < refractory) continue;

    if (mwi[p] > det.threshold()) {
      const double slope = max_slope_near(p);
      const bool t_wave = !qrs.empty() && p - qrs.back() < t_window && slope < 0.5 * last_slope;
      if (!t_wave) {
        accept(p, 0.125);
        continue;
      }
    }
    det.npki = 0.125 * mwi[p] + 0.875 * det.npki;
    noise_candidates.push_back(p);
  }

  // Move each fiducial mark onto the largest deflection of the input.
  std::vector<std::size_t> peaks;
  for (std::size_t p : qrs) {
    const std::size_t lo = p >= half_window ? p - half_window : 0;
    const std::size_t hi = std::min(n, p + half_window + 1);
    const double mean = std::accumulate(x.samples.begin() + static_cast<std::ptrdiff_t>(lo),
                                        x.samples.begin() + static_cast<std::ptrdiff_t>(hi), 0.0) /
                        static_cast<double>(hi - lo);
    std::size_t best = lo;
    for (std::size_t i = lo; i < hi; ++i)
      if (std::abs(x.samples[i] - mean) > std::abs(x.samples[best] - mean)) best = i;
    if (!peaks.empty() && best < peaks.back() + refractory) continue;
    peaks.push_back(best);
  }
  return peaks;
}

std::vector<double> low_pass_differentiate(const io::Signal& x, const LpdParams& params) {
  std::size_t window = std::max<std::size_t>(1, samples_for(params.smoothing_s, x.fs));
  if (window % 2 == 0) ++window;
  const auto smooth = centered_moving_average(x.samples, window);
  const std::size_t n = smooth.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = 0.5 * (smooth[i + 1] - smooth[i - 1]);
  return d;
}

Delineation lpd_delineate(const io::Signal& x, const std::vector<std::size_t>& peaks, const LpdParams& params) {
  Delineation out;
  if (peaks.empty()) return out;
  const double fs = x.fs;
  const std::size_t n = x.size();
  auto d = low_pass_differentiate(x, params);

  const std::size_t refine = samples_for(params.refine_window_s, fs);
  const std::size_t slope_win = std::max<std::size_t>(1, samples_for(params.slope_window_s, fs));
  const std::size_t max_width = std::max<std::size_t>(1, samples_for(params.max_width_s, fs));

  std::optional<std::pair<std::size_t, std::size_t>> last_widths;

  for (std::size_t peak : peaks) {
    if (peak >= n) continue;
    const std::size_t lo = peak >= refine ? peak - refine : 0;
    const std::size_t hi = std::min(n - 1, peak + refine);

    // Polarity: a QRS dominated by a downward deflection is delineated on -d.
    double mean = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) mean += x.samples[i];
    mean /= static_cast<double>(hi - lo + 1);
    const double sign = x.samples[peak] >= mean ? 1.0 : -1.0;
    auto slope = [&](std::size_t i) { return sign * d[i]; };

    // Refine the peak to the nearest + to - zero crossing of the slope.
    std::size_t r = peak;
    std::size_t best_dist = n;
    for (std::size_t i = std::max<std::size_t>(lo, 1); i <= hi; ++i) {
      if (slope(i - 1) > 0.0 && slope(i) <= 0.0) {
        const std::size_t cand = slope(i) == 0.0 || std::abs(slope(i)) < std::abs(slope(i - 1)) ? i : i - 1;
        const std::size_t dist = cand > peak ? cand - peak : peak - cand;
        if (dist < best_dist) {
          best_dist = dist;
          r = cand;
        }
      }
    }

    bool ok = r > 0 && r + 1 < n;
    std::size_t onset = 0, offset = 0;
    if (ok) {
      const std::size_t up_lo = r >= slope_win ? r - slope_win : 0;
      std::size_t up = r;
      for (std::size_t i = up_lo; i <= r; ++i)
        if (slope(i) > slope(up)) up = i;
      const std::size_t down_hi = std::min(n - 1, r + slope_win);
      std::size_t down = r;
      for (std::size_t i = r; i <= down_hi; ++i)
        if (slope(i) < slope(down)) down = i;
      const double up_max = slope(up);
      const double down_min = slope(down);
      ok = up_max > 0.0 && down_min < 0.0;
      if (ok) {
        const double th_on = params.threshold_fraction * up_max;
        const double th_off = params.threshold_fraction * -down_min;
        const std::size_t on_limit = r >= max_width ? r - max_width : 0;
        std::size_t i = up;
        while (i > on_limit && slope(i) > th_on) --i;
        onset = i;
        std::size_t j = down;
        const std::size_t off_limit = std::min(n - 1, r + max_width);
        while (j < off_limit && -slope(j) > th_off) ++j;
        offset = j;
        ok = slope(onset) <= th_on && -slope(offset) <= th_off && onset < r && r < offset;
      }
    }

    BeatBoundaries beat;
    beat.r_peak = r;
    if (ok) {
      beat.qrs_onset = onset;
      beat.qrs_offset = offset;
      last_widths = std::make_pair(r - onset, offset - r);
    } else if (last_widths && r >= last_widths->first && r + last_widths->second < n) {
      beat.qrs_onset = r - last_widths->first;
      beat.qrs_offset = r + last_widths->second;
      beat.carried = true;
    } else {
      continue;
    }
    if (!(beat.qrs_onset < beat.r_peak && beat.r_peak < beat.qrs_offset)) continue;
    out.push_back(beat);
  }
  return out;
}

}  // namespace hardc::dsp
