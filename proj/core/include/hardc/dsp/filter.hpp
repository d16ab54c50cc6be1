#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "hardc/io/record_io.hpp"

namespace hardc::dsp {

enum class FilterKind { cheby2_bandpass, butter_bandpass };

// One second-order section, a[0] == 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{};
};

// Transfer-function coefficients, a[0] == 1. The designs also fill the same
// filter as cascaded biquads; high-order band-passes with poles near z = 1
// lose several digits in the expanded polynomial form, so filtfilt runs the
// cascade when one is present.
struct FilterCoeffs {
  std::vector<double> b;
  std::vector<double> a;
  std::vector<Biquad> sections;
  int order = 0;  // analog prototype order; the band-pass has 2*order poles
  FilterKind kind = FilterKind::cheby2_bandpass;
};

// Chebyshev type II band-pass. f_lo and f_hi are the -3 dB passband edges;
// the equiripple stopband sits at least stop_atten_db below unity.
FilterCoeffs design_cheby2_bandpass(double fs, double f_lo, double f_hi, int order, double stop_atten_db);

// Butterworth band-pass with -3 dB edges at f_lo and f_hi (any order >= 1).
FilterCoeffs design_butter_bandpass(double fs, double f_lo, double f_hi, int order);

// Roots of a real polynomial given highest-degree coefficient first.
std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs);

std::vector<std::complex<double>> poles(const FilterCoeffs& c);
bool is_stable(const FilterCoeffs& c);

// H(e^{jw}) evaluated at frequency f (Hz).
std::complex<double> frequency_response(const FilterCoeffs& c, double f, double fs);

// Direct-form II transposed filtering with optional initial state.
std::vector<double> lfilter(const FilterCoeffs& c, std::span<const double> x,
                            std::span<const double> zi = {});

// Steady-state initial conditions for a unit step.
std::vector<double> lfilter_zi(const FilterCoeffs& c);

std::size_t filtfilt_padlen(const FilterCoeffs& c);

// Cascade filtering; zi holds two state values per section.
std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x,
                            std::span<const double> zi = {});
// Step steady state of the cascade, two values per section.
std::vector<double> sosfilt_zi(std::span<const Biquad> sections);

// Zero-phase forward-backward filtering with odd extension at both ends.
std::vector<double> filtfilt(const FilterCoeffs& c, std::span<const double> x);
io::Signal filtfilt(const FilterCoeffs& c, const io::Signal& x);

}  // namespace hardc::dsp
