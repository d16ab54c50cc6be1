#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hardc/dsp/qrs.hpp"
#include "hardc/dsp/wavelet.hpp"
#include "hardc/io/record_io.hpp"

namespace hardc::dsp {

// Per-segment standardisation with the population standard deviation.
std::vector<double> zscore(std::span<const double> x);
io::Signal zscore(const io::Signal& x);

struct SegmentedBeats {
  std::size_t width = 0;
  std::vector<double> values;        // row-major, one row per kept peak
  std::vector<std::size_t> centers;  // peak index of each row

  std::size_t size() const { return centers.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * width, width);
  }
};

// Windows [p - width/2, p + width/2) around each peak; out-of-bounds windows
// are skipped.
SegmentedBeats segment_beats(const io::Signal& x, std::span<const std::size_t> peaks, std::size_t width);

struct PipelineConfig {
  double fs = 360.0;
  double band_lo = 0.5;
  double band_hi = 48.0;
  int filter_order = 4;
  double stop_atten_db = 40.0;
  int wavelet_moments = 6;
  int wavelet_levels = 9;
  ThresholdRule threshold_rule = ThresholdRule::soft_universal;
  std::size_t segment_width = 360;
  bool delineate = true;
  double label_window_s = 0.2;

  // Strict parser for the `key = value` keys above; unknown keys throw ConfigError.
  static PipelineConfig from_map(const std::map<std::string, std::string>& kv);
  static const std::vector<std::string>& keys();
};

struct PipelineOutput {
  io::BeatDataset beats;
  std::vector<std::size_t> peaks;       // all detected R peaks
  std::vector<std::size_t> beat_peaks;  // peak of each emitted beat
  Delineation delineation;
};

// filtfilt(Chebyshev II) -> wavelet denoise -> Pan-Tompkins -> LPD ->
// segmentation -> per-segment z-score; labels come from the nearest
// annotation within label_window_s. Stage failures are rethrown as StageError.
PipelineOutput preprocess_record(const io::RawRecord& rec, const PipelineConfig& cfg);
io::BeatDataset preprocess_pipeline(const io::RawRecord& rec, const PipelineConfig& cfg);

}  // namespace hardc::dsp
