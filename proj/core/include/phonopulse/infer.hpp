#pragma once

#include <span>
#include <vector>

#include "phonopulse/dsp.hpp"
#include "phonopulse/model.hpp"

namespace phonopulse {

/// Exponential relaxation fit of a peak-area series,
/// area(t) = A_eq + (A_0 - A_eq) e^(-Gamma t), extrapolated to pulse onset.
struct HeatingFit {
  double area_t0 = 0.0;       ///< V^2, extrapolated to t = 0
  double area_eq = 0.0;       ///< V^2
  double gamma_fit = 0.0;     ///< decay rate, 1/s
  double area_t0_ci95 = 0.0;
  double area_eq_ci95 = 0.0;
  double gamma_ci95 = 0.0;
  double area_t0_se = 0.0;  ///< standard error behind the CI
  double se_dof = 0.0;      ///< degrees of freedom behind the CI
  double residual_rms = 0.0;
  std::size_t n_points = 0;
  bool ill_conditioned = false;  ///< Gamma unidentifiable on this span
  bool scatter_ci = false;       ///< CIs from repetition-group scatter
};

/// Fit a bare (t, area) series; CIs from the residual-scaled covariance.
/// Optional per-point standard errors weight the fit.
HeatingFit fit_heating(std::span<const double> t, std::span<const double> area,
                       std::span<const double> area_se = {});

/// Fit an ensemble-averaged series. Per-point errors weight the fit; when
/// repetition groups are available the parameter CIs come from the scatter
/// of independent group fits (the in-series autocorrelation left by the
/// filter and the mechanical linewidth makes residual-scaled CIs
/// anticonservative there). When the series records its analysis filter,
/// the extrapolated intercept is compensated for the filter's transient
/// response (see ou_transient_gain).
HeatingFit fit_heating(const PeakAreaSeries& series);

/// Linear phonon-number noise budget: area_t0 = alpha * n + beta.
struct NoiseBudget {
  double alpha = 0.0;  ///< V^2 per phonon
  double beta = 0.0;   ///< V^2
  double alpha_ci95 = 0.0;
  double beta_ci95 = 0.0;
  double cov_aa = 0.0, cov_bb = 0.0, cov_ab = 0.0;
  double s_imp = 0.0;       ///< off-resonance imprecision area, V^2
  double s_imp_frac = 0.0;  ///< S_imp / (beta - S_imp)
  double delta_omega = 0.0; ///< integration bandwidth, Hz
  double residual_rms = 0.0;
  std::size_t n_points = 0;
};

struct CalPoint {
  double temperature_k = 0.0;
  double area_t0 = 0.0;
  double sigma = 0.0;  ///< optional standard error (0 = unweighted)
};

/// Weighted linear fit of area_t0 against bose_einstein(T, f_m) using only
/// points with T >= t_min_k. Fewer than `min_points` qualifying points is a
/// domain error (3 by default; 2 is the mathematical minimum for the exact
/// two-point case).
NoiseBudget fit_calibration(std::span<const CalPoint> points, double f_m,
                            double t_min_k, int min_points = 3);

/// Occupancy from a calibrated area: (area - beta) / alpha. Slightly
/// negative results are preserved; the downstream fits handle them.
double to_occupancy(double area_t0, const NoiseBudget& budget);

/// S_imp / (S_gs + S_ba) given the total beta and the off-resonance area.
double imprecision_split(double beta, double offres_area);

/// How the occupancy-curve offset is parameterized.
enum class OffsetConvention {
  occupancy,    ///< n(T) = bose_einstein(T) + n_offset
  temperature,  ///< n(T) = bose_einstein(T + dT)
};

struct OccPoint {
  double temperature_k = 0.0;
  double occupancy = 0.0;
  double sigma = 0.0;  ///< optional standard error (0 = unweighted)
};

struct OccupancyFit {
  OffsetConvention convention = OffsetConvention::occupancy;
  double offset_param = 0.0;  ///< phonons, or K for the temperature convention
  double offset_ci95 = 0.0;
  double n_base = 0.0;        ///< predicted occupancy at the lowest fridge T
  double n_base_ci95 = 0.0;
  double t_device_base = 0.0; ///< K, inverse Bose-Einstein of n_base
  double t_device_ci95 = 0.0;
  double residual_rms = 0.0;
  std::size_t n_points = 0;
  bool chain_ci = false;  ///< CI includes calibration covariance (pipeline)
};

/// Bose-Einstein-with-offset fit over (T_fridge, occupancy) points.
/// Requires >= 4 points.
OccupancyFit fit_occupancy_curve(std::span<const OccPoint> points, double f_m,
                                 OffsetConvention convention =
                                     OffsetConvention::occupancy);

}  // namespace phonopulse
