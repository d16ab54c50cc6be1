#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hardc/io/record_io.hpp"

namespace hardc::dsp {

enum class ThresholdRule { soft_universal, none };

struct WaveletSpec {
  int vanishing_moments = 6;  // Daubechies N; filters have 2N taps
  int levels = 9;
  ThresholdRule threshold_rule = ThresholdRule::soft_universal;
};

// Coefficients of the Daubechies polynomial P_N(y) = sum_k C(N-1+k, k) y^k,
// lowest degree first.
std::vector<double> daubechies_polynomial(int vanishing_moments);

// Minimum-phase Daubechies scaling (synthesis low-pass) filter with 2N taps,
// obtained by spectral factorisation of P_N. Sums to sqrt(2).
std::vector<double> daubechies_scaling_filter(int vanishing_moments);

struct WaveletDecomposition {
  std::vector<double> approx;
  std::vector<std::vector<double>> details;  // finest level first
  std::size_t original_length = 0;
  std::size_t padded_length = 0;
};

// Periodised orthogonal DWT. The input is symmetrically extended to a
// multiple of 2^levels first, so reconstruction is exact for any length.
WaveletDecomposition wavedec(std::span<const double> x, const WaveletSpec& spec);
std::vector<double> waverec(const WaveletDecomposition& dec, const WaveletSpec& spec);

// Soft universal threshold: lambda = sigma * sqrt(2 ln n), with sigma taken
// from the median absolute finest-level detail over 0.6745.
double universal_threshold(const WaveletDecomposition& dec);

std::vector<double> dwt_denoise(std::span<const double> x, const WaveletSpec& spec);
io::Signal dwt_denoise(const io::Signal& x, const WaveletSpec& spec);

}  // namespace hardc::dsp
