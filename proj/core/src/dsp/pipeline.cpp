#include "hardc/dsp/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "hardc/dsp/filter.hpp"
#include "hardc/error.hpp"

namespace hardc::dsp {

std::vector<double> zscore(std::span<const double> x) {
  if (x.size() < 2) throw SignalTooShort("z-score needs at least 2 samples");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) throw ConstantSignal("standard deviation is zero");
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [&](double v) { return (v - mean) / sd; });
  return out;
}

io::Signal zscore(const io::Signal& x) { return {zscore(std::span<const double>(x.samples)), x.fs}; }

SegmentedBeats segment_beats(const io::Signal& x, std::span<const std::size_t> peaks, std::size_t width) {
  if (width == 0 || width % 2 != 0) throw SpecError("segment width must be a positive even number");
  SegmentedBeats out;
  out.width = width;
  const std::size_t half = width / 2;
  for (std::size_t p : peaks) {
    if (p < half || p + half > x.size()) continue;
    out.values.insert(out.values.end(), x.samples.begin() + static_cast<std::ptrdiff_t>(p - half),
                      x.samples.begin() + static_cast<std::ptrdiff_t>(p + half));
    out.centers.push_back(p);
  }
  return out;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* begin = value.data();
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(0, "bad value '" + value + "' for key '" + key + "'");
  return out;
}

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

}  // namespace

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> k{"fs",          "band_lo",         "band_hi",        "filter_order",
                                          "stop_atten_db", "wavelet_moments", "wavelet_levels", "threshold_rule",
                                          "segment_width", "delineate",       "label_window_s"};
  return k;
}

PipelineConfig PipelineConfig::from_map(const std::map<std::string, std::string>& kv) {
  PipelineConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "fs") cfg.fs = parse_number<double>(key, value);
    else if (key == "band_lo") cfg.band_lo = parse_number<double>(key, value);
    else if (key == "band_hi") cfg.band_hi = parse_number<double>(key, value);
    else if (key == "filter_order") cfg.filter_order = parse_number<int>(key, value);
    else if (key == "stop_atten_db") cfg.stop_atten_db = parse_number<double>(key, value);
    else if (key == "wavelet_moments") cfg.wavelet_moments = parse_number<int>(key, value);
    else if (key == "wavelet_levels") cfg.wavelet_levels = parse_number<int>(key, value);
    else if (key == "segment_width") cfg.segment_width = parse_number<std::size_t>(key, value);
    else if (key == "label_window_s") cfg.label_window_s = parse_number<double>(key, value);
    else if (key == "threshold_rule") {
      if (value == "soft_universal") cfg.threshold_rule = ThresholdRule::soft_universal;
      else if (value == "none") cfg.threshold_rule = ThresholdRule::none;
      else throw ConfigError(0, "threshold_rule must be 'soft_universal' or 'none'");
    } else if (key == "delineate") {
      if (value == "true" || value == "1") cfg.delineate = true;
      else if (value == "false" || value == "0") cfg.delineate = false;
      else throw ConfigError(0, "delineate must be true or false");
    } else {
      throw ConfigError(0, "unknown pipeline key '" + key + "'");
    }
  }
  return cfg;
}

PipelineOutput preprocess_record(const io::RawRecord& rec, const PipelineConfig& cfg) {
  if (rec.signal.fs != cfg.fs)
    throw StageError("input", FormatError("record sampled at " + std::to_string(rec.signal.fs) +
                                          " Hz but the pipeline is configured for " + std::to_string(cfg.fs)));
  PipelineOutput out;
  out.beats = io::BeatDataset(cfg.segment_width);

  const auto filtered = run_stage("filter", [&] {
    const auto coeffs = design_cheby2_bandpass(cfg.fs, cfg.band_lo, cfg.band_hi, cfg.filter_order, cfg.stop_atten_db);
    return filtfilt(coeffs, rec.signal);
  });
  const auto denoised = run_stage("denoise", [&] {
    return dwt_denoise(filtered, WaveletSpec{cfg.wavelet_moments, cfg.wavelet_levels, cfg.threshold_rule});
  });
  out.peaks = run_stage("detect", [&] { return pan_tompkins(denoised); });
  if (cfg.delineate) out.delineation = run_stage("delineate", [&] { return lpd_delineate(denoised, out.peaks); });
  const auto segments = run_stage("segment", [&] { return segment_beats(denoised, out.peaks, cfg.segment_width); });

  const auto window = static_cast<std::size_t>(std::lround(cfg.label_window_s * cfg.fs));
  run_stage("normalize", [&] {
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const std::size_t p = segments.centers[i];
      // Nearest annotation by sample distance; ties go to the earlier one.
      auto it = std::lower_bound(rec.annotations.begin(), rec.annotations.end(), p,
                                 [](const io::Annotation& a, std::size_t idx) { return a.sample < idx; });
      const io::Annotation* best = nullptr;
      std::size_t best_dist = window + 1;
      if (it != rec.annotations.end() && it->sample - p < best_dist) {
        best = &*it;
        best_dist = it->sample - p;
      }
      if (it != rec.annotations.begin()) {
        const auto& prev = *std::prev(it);
        if (p - prev.sample <= best_dist) best = &prev, best_dist = p - prev.sample;
      }
      if (best == nullptr || best_dist > window) continue;
      out.beats.push_back(zscore(segments.row(i)), best->label);
      out.beat_peaks.push_back(p);
    }
    return 0;
  });
  return out;
}

io::BeatDataset preprocess_pipeline(const io::RawRecord& rec, const PipelineConfig& cfg) {
  return preprocess_record(rec, cfg).beats;
}

}  // namespace hardc::dsp
