#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hardc/io/record_io.hpp"

// Seeded synthetic data used by tests, the self-test and the toy pipeline.
namespace hardc::io {

struct SyntheticEcgParams {
  double fs = 360.0;
  double bpm = 72.0;
  std::size_t beats = 60;
  double lead_in_s = 1.0;
  double tail_s = 1.0;
  double noise_sd = 0.01;
  double wander_amp = 0.05;  // 0.3 Hz baseline wander
  // Beat labels cycle through this pattern; each class gets its own shape.
  std::vector<ClassLabel> pattern{ClassLabel::N};
  std::uint64_t seed = 0;
};

struct SyntheticRecord {
  RawRecord record;
  std::vector<std::size_t> r_peaks;
};

// Sum-of-Gaussians P-QRS-T beats at a fixed rate, annotated at each R peak.
SyntheticRecord synthetic_ecg(const SyntheticEcgParams& params);

// A pattern with every class present, N dominant.
std::vector<ClassLabel> mixed_class_pattern();

struct ConstructedQrs {
  Signal signal;
  std::vector<std::size_t> r_peaks, onsets, offsets;
};

// Triangular QRS complexes with known onset/offset on a flat baseline with
// smooth P and T waves.
ConstructedQrs constructed_qrs_beats(std::size_t beats = 12, double fs = 360.0, std::uint64_t seed = 0);

// n beats, classes interleaved; class c is a sinusoid with c+1 cycles per
// segment, random phase and amplitude jitter plus white noise.
BeatDataset toy_separable_beats(std::size_t n = 500, std::size_t segment_len = 64, std::uint64_t seed = 0,
                                double noise_sd = 0.1);

}  // namespace hardc::io
