#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "phonopulse/fir.hpp"
#include "phonopulse/synth.hpp"

namespace phonopulse {

/// Time-resolved in-band mean-square signal (peak area), ensemble averaged.
/// The grid starts at t_trunc = (n_taps - 1) dt, the filter settling time;
/// earlier samples are invalid and are not stored.
struct PeakAreaSeries {
  std::vector<double> t;        ///< s, relative to pulse onset
  std::vector<double> area;     ///< V^2
  std::vector<double> area_se;  ///< standard error from repetition scatter
  double t_trunc = 0.0;         ///< s
  std::size_t n_reps_averaged = 0;

  /// Per-group ensemble means (repetitions split into contiguous groups);
  /// used downstream for scatter-based parameter uncertainties.
  std::vector<std::vector<double>> group_area;

  /// Analysis filter actually applied, for response deconvolution.
  std::vector<double> filter_taps;
  double dt = 0.0;

  void to_csv(std::ostream& out) const;
};

/// One-sided power spectral density.
struct Spectrum {
  std::vector<double> f;    ///< Hz
  std::vector<double> psd;  ///< V^2 / Hz
  double resolution = 0.0;  ///< Hz

  /// integral of S df (should match the time-domain variance)
  double total_power() const;
  void to_csv(std::ostream& out) const;
};

/// Complex baseband conversion z_k = 2 V_k e^(-i 2 pi f_if t_k). After an
/// ideal low-pass, a tone A cos(2 pi f_if t + phi) becomes A e^(i phi).
std::vector<std::complex<double>> demodulate(std::span<const double> trace,
                                             double f_if, double dt);

/// Convolve a complex series with real FIR taps; output y_k uses full tap
/// overlap only and is annotated with the delay-compensated time axis by
/// the callers.
std::vector<std::complex<double>> fir_apply(
    std::span<const std::complex<double>> z, std::span<const double> taps);

struct PeakAreaOptions {
  int n_groups = 16;   ///< repetition groups for scatter statistics
  int n_threads = 1;
  double f_center_override = -1.0;  ///< demodulate off-resonance when >= 0
};

/// Ensemble mean of 0.5 |lowpass(demodulate(V))|^2 on the truncated grid.
/// Normalization anchor: a pure tone A cos(2 pi f_center t) has area A^2/2.
PeakAreaSeries peak_area(const TraceSet& traces, const FilterSpec& filt,
                         const PeakAreaOptions& options = {});

/// Welch PSD with Hann segments. `overlap` in samples (< segment_length).
/// One-sided; sum(S) df equals the series variance to within window effects.
Spectrum welch_psd(std::span<const double> trace, double sample_rate,
                   std::size_t segment_length, std::size_t overlap);

struct LorentzianFit {
  double center = 0.0;
  double fwhm = 0.0;
  double amplitude = 0.0;  ///< signed; negative for dips
  double offset = 0.0;
  double center_ci95 = 0.0, fwhm_ci95 = 0.0, amplitude_ci95 = 0.0,
         offset_ci95 = 0.0;
  std::vector<double> covariance;  ///< 4x4 row-major (center, fwhm, amp, off)
  double residual_rms = 0.0;
  int iterations = 0;

  /// Integrated area of the peak above the offset: pi/2 * |amp| * fwhm.
  double peak_area() const;
};

/// Least squares of y = offset + amplitude / (1 + (2 (x - center)/fwhm)^2).
/// Requires >= 8 points spanning at least two linewidths.
LorentzianFit lorentzian_fit(std::span<const double> x,
                             std::span<const double> y);

/// Fraction of a Lorentzian line (FWHM `fwhm`) inside a brick-wall band of
/// total width `bandwidth` centered on it: (2/pi) atan(bandwidth / fwhm).
double lorentzian_band_fraction(double bandwidth, double fwhm);

/// Exact in-band fraction of a stationary OU sideband (decay rate 1/s) for
/// an actual tap set: sum_jl h_j h_l e^(-G |j-l| dt / 2).
double ou_passband_fraction(std::span<const double> taps, double decay_rate,
                            double dt);

/// Transmission factor of the e^(-G t) transient through the same taps:
/// (sum_j h_j e^(G (j - M) dt / 2))^2 with M the group delay.
double ou_transient_gain(std::span<const double> taps, double decay_rate,
                         double dt);

}  // namespace phonopulse
