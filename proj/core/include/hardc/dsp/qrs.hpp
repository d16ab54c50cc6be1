#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hardc/io/record_io.hpp"

namespace hardc::dsp {

struct PanTompkinsParams {
  double band_lo_hz = 5.0;
  double band_hi_hz = 15.0;
  double integration_window_s = 0.150;
  double refractory_s = 0.200;
  double t_wave_window_s = 0.360;
  double searchback_factor = 1.66;
};

// R-peak sample indices, strictly increasing and at least one refractory
// period apart.
std::vector<std::size_t> pan_tompkins(const io::Signal& x, const PanTompkinsParams& params = {});

struct BeatBoundaries {
  std::size_t qrs_onset = 0;
  std::size_t r_peak = 0;
  std::size_t qrs_offset = 0;
  std::optional<std::size_t> p_onset, p_offset, t_onset, t_offset;
  bool carried = false;  // boundaries copied from the previous beat
};

using Delineation = std::vector<BeatBoundaries>;

struct LpdParams {
  double smoothing_s = 0.010;      // moving-average low-pass ahead of the differentiator
  double refine_window_s = 0.050;  // zero-crossing search around each detected peak
  double slope_window_s = 0.080;   // where the steepest QRS slopes are searched
  double max_width_s = 0.150;      // boundary scan limit on each side
  double threshold_fraction = 0.05;
};

// Low-pass differentiated signal used by the delineator.
std::vector<double> low_pass_differentiate(const io::Signal& x, const LpdParams& params = {});

// QRS onset/offset per peak. Beats whose boundaries cannot be found inherit
// the previous beat's widths; a leading undelineable beat is dropped.
Delineation lpd_delineate(const io::Signal& x, const std::vector<std::size_t>& peaks, const LpdParams& params = {});

}  // namespace hardc::dsp
