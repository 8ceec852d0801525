#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace phonopulse {

enum class Window { hann, hamming, blackman, rect };

Window window_from_name(const std::string& name);
std::string window_name(Window w);

/// Post-demodulation low-pass description, equivalent to a bandpass of the
/// given two-sided width centered on f_center before demodulation.
///
/// `bandwidth` is the filter's equivalent noise bandwidth: white noise of
/// variance s^2 contributes exactly s^2 * bandwidth / (f_s / 2) to the peak
/// area, independent of tap count or window. The settling time is
/// (n_taps - 1) / f_s; the default tap count places it at 1.5625 / bandwidth
/// (0.25 us for the 6.25 MHz analysis filter).
struct FilterSpec {
  double f_center = 0.0;   ///< Hz, must equal the demodulation frequency
  double bandwidth = 0.0;  ///< two-sided equivalent noise bandwidth, Hz
  int n_taps = 0;          ///< odd FIR length
  Window window = Window::hann;

  static FilterSpec design(double f_center_hz, double bandwidth_hz,
                           double sample_rate_hz);

  double settling_time(double sample_rate_hz) const {
    return static_cast<double>(n_taps - 1) / sample_rate_hz;
  }
  void validate(double sample_rate_hz) const;
};

/// Unit-DC-gain windowed-sinc low-pass whose equivalent noise bandwidth
/// equals spec.bandwidth (solved by bisection on the design cutoff).
std::vector<double> lowpass_taps(const FilterSpec& spec, double sample_rate_hz);

/// Two-sided equivalent noise bandwidth f_s * sum(h^2) / (sum h)^2, Hz.
double filter_enbw_hz(std::span<const double> taps, double sample_rate_hz);

/// Frequency response H(f) of a tap set at sample rate f_s.
std::complex<double> filter_response(std::span<const double> taps, double f_hz,
                                     double sample_rate_hz);

/// |H(f)|^2 in dB relative to DC.
double filter_attenuation_db(std::span<const double> taps, double f_hz,
                             double sample_rate_hz);

}  // namespace phonopulse
