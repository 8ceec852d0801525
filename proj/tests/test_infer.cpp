#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "phonopulse/constants.hpp"
#include "phonopulse/errors.hpp"
#include "phonopulse/infer.hpp"
#include "phonopulse/rng.hpp"

using namespace phonopulse;

namespace {
constexpr double kFm = 2.3725e9;
}

TEST_CASE("heating fit: noiseless exponential recovered exactly") {
  const double a0 = 2.0, a_eq = 10.0, gamma = 1e6;
  std::vector<double> t, y;
  for (int i = 0; i < 600; ++i) {
    t.push_back(0.25e-6 + i * 8e-9);
    y.push_back(a_eq + (a0 - a_eq) * std::exp(-gamma * t.back()));
  }
  const HeatingFit fit = fit_heating(t, y);
  CHECK(!fit.ill_conditioned);
  CHECK(fit.area_t0 == doctest::Approx(a0).epsilon(1e-9));
  CHECK(fit.area_eq == doctest::Approx(a_eq).epsilon(1e-9));
  CHECK(fit.gamma_fit == doctest::Approx(gamma).epsilon(1e-9));
}

TEST_CASE("heating fit: constant series raises the ill-conditioned flag") {
  std::vector<double> t, y;
  for (int i = 0; i < 100; ++i) {
    t.push_back(0.25e-6 + i * 8e-9);
    y.push_back(5.0);
  }
  const HeatingFit fit = fit_heating(t, y);
  CHECK(fit.ill_conditioned);
  CHECK(fit.area_t0 == doctest::Approx(5.0).epsilon(1e-12));

  std::vector<double> t_short(t.begin(), t.begin() + 10),
      y_short(y.begin(), y.begin() + 10);
  CHECK_THROWS_AS(fit_heating(t_short, y_short), std::domain_error);
}

TEST_CASE("heating fit compensates the filter's transient response") {
  // Deterministic expectation series built from the exact filtered-OU
  // moments: area(t) = beta + alpha (n_eq L + (n0 - n_eq) chi e^(-G t)).
  const double fs = 125e6, dt = 1.0 / fs;
  const auto taps = lowpass_taps(FilterSpec::design(30e6, 6.25e6, fs), fs);
  const double gamma = 1.05e6;
  const double alpha = 1e-6, beta = 1.5e-6;
  const double n0f = 1.3, neqf = 95.6;
  const double l_pass = ou_passband_fraction(taps, gamma, dt);
  const double chi = ou_transient_gain(taps, gamma, dt);

  PeakAreaSeries series;
  series.dt = dt;
  series.filter_taps = taps;
  series.t_trunc = (taps.size() - 1) * dt;
  for (int i = 0; i < 580; ++i) {
    const double t = series.t_trunc + i * dt;
    series.t.push_back(t);
    series.area.push_back(beta + alpha * (neqf * l_pass +
                                          (n0f - neqf) * chi *
                                              std::exp(-gamma * t)));
  }
  series.n_reps_averaged = 1;

  const HeatingFit fit = fit_heating(series);
  // The compensated intercept estimates alpha * L * n0 + beta.
  const double a0_expected = beta + alpha * l_pass * n0f;
  CHECK(fit.gamma_fit == doctest::Approx(gamma).epsilon(1e-7));
  CHECK(fit.area_t0 == doctest::Approx(a0_expected).epsilon(1e-6));
}

TEST_CASE("heating fit: truncation moves A_0 by less than its CI") {
  // Noisy synthetic relaxation sampled from t = 0; dropping the first
  // 0.25 us must not move the extrapolated intercept beyond its CI.
  Rng rng(2211);
  const double a0 = 2.0e-6, a_eq = 9.6e-5, gamma = 1.05e6;
  std::vector<double> t_full, y_full;
  for (int i = 0; i < 625; ++i) {
    const double t = i * 8e-9;
    const double m = a_eq + (a0 - a_eq) * std::exp(-gamma * t);
    t_full.push_back(t);
    y_full.push_back(m * (1.0 + 0.02 * rng.gaussian()));
  }
  const HeatingFit full = fit_heating(t_full, y_full);

  std::vector<double> t_cut, y_cut;
  for (std::size_t i = 0; i < t_full.size(); ++i) {
    if (t_full[i] >= 0.25e-6) {
      t_cut.push_back(t_full[i]);
      y_cut.push_back(y_full[i]);
    }
  }
  const HeatingFit cut = fit_heating(t_cut, y_cut);
  CHECK(std::abs(cut.area_t0 - full.area_t0) < cut.area_t0_ci95);
  CHECK(std::abs(cut.area_t0 - a0) < 2.0 * cut.area_t0_ci95);
}

TEST_CASE("calibration: exact lines, point gating, device-scale beta") {
  const double alpha = 0.8e-6, beta = 1.18e-6;  // Fig-4b-scale V^2 units
  auto area_of = [&](double t_k) {
    return alpha * bose_einstein(t_k, kFm) + beta;
  };

  // Minimal exact case: two points, gating waived.
  std::vector<CalPoint> two = {{1.5, area_of(1.5), 0.0},
                               {6.5, area_of(6.5), 0.0}};
  const NoiseBudget nb2 = fit_calibration(two, kFm, 0.0, 2);
  CHECK(nb2.alpha == doctest::Approx(alpha).epsilon(1e-12));
  CHECK(nb2.beta == doctest::Approx(beta).epsilon(1e-12));

  // Default gate: three qualifying points required.
  CHECK_THROWS_AS(fit_calibration(two, kFm, 0.0), std::domain_error);
  std::vector<CalPoint> cold = {
      {0.02, area_of(0.02), 0.0}, {0.1, area_of(0.1), 0.0},
      {0.5, area_of(0.5), 0.0},   {1.0, area_of(1.0), 0.0}};
  CHECK_THROWS_AS(fit_calibration(cold, kFm, 1.5), std::domain_error);

  // Five-temperature sweep with noise: recovered within the fit CI.
  Rng rng(99);
  std::vector<CalPoint> sweep;
  for (double t_k : {1.5, 2.0, 3.0, 4.5, 6.5}) {
    const double se = 0.02e-6 * (1.0 + bose_einstein(t_k, kFm) / 20.0);
    sweep.push_back({t_k, area_of(t_k) + se * rng.gaussian(), se});
  }
  const NoiseBudget nb = fit_calibration(sweep, kFm, 1.5);
  CHECK(std::abs(nb.alpha - alpha) < 2.0 * nb.alpha_ci95);
  CHECK(std::abs(nb.beta - beta) < 2.0 * nb.beta_ci95);
  CHECK(nb.beta == doctest::Approx(1.18e-6).epsilon(0.10));
}

TEST_CASE("to_occupancy identities and the 95-phonon saturation") {
  NoiseBudget budget;
  budget.alpha = 0.8e-6;
  budget.beta = 1.18e-6;
  CHECK(to_occupancy(budget.beta, budget) == doctest::Approx(0.0));
  CHECK(to_occupancy(budget.alpha + budget.beta, budget) ==
        doctest::Approx(1.0));
  // Device scale: the recalibrated saturation level.
  const double area_sat = budget.alpha * 95.0 + budget.beta;
  CHECK(to_occupancy(area_sat, budget) == doctest::Approx(95.0).epsilon(1e-12));
  // Slightly negative areas are preserved.
  CHECK(to_occupancy(budget.beta - 0.1 * budget.alpha, budget) ==
        doctest::Approx(-0.1));
}

TEST_CASE("calibration-occupancy round trip is exact for any n") {
  NoiseBudget budget;
  budget.alpha = 3.3e-7;
  budget.beta = 9.9e-7;
  for (double n : {-0.5, 0.0, 0.7, 12.68, 95.0, 1e4}) {
    CHECK(to_occupancy(budget.alpha * n + budget.beta, budget) ==
          doctest::Approx(n).epsilon(1e-12));
  }
}

TEST_CASE("imprecision split") {
  CHECK(imprecision_split(2.0, 1.0) == doctest::Approx(1.0));
  CHECK(imprecision_split(1.0, 0.0) == doctest::Approx(0.0));
  // S_imp / (S_gs + S_ba) = 1.6 when offres / beta = 1.6 / 2.6.
  const double beta = 1.18e-6;
  CHECK(imprecision_split(beta, beta * 1.6 / 2.6) ==
        doctest::Approx(1.6).epsilon(1e-12));
  CHECK_THROWS_AS(imprecision_split(1.0, 1.5), std::domain_error);
}

TEST_CASE("occupancy curve: zero and injected offsets") {
  const std::vector<double> temps = {0.02, 0.1, 0.5, 1.5, 3.0, 4.5, 6.5};

  // Offset-free synthetic data.
  std::vector<OccPoint> clean;
  for (double t : temps) clean.push_back({t, bose_einstein(t, kFm), 0.0});
  const OccupancyFit f0 = fit_occupancy_curve(clean, kFm);
  CHECK(f0.offset_param == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f0.n_base == doctest::Approx(bose_einstein(0.02, kFm)).epsilon(1e-9));

  // Injected 0.6-phonon offset with noise: recovered within 2 CI.
  Rng rng(123);
  std::vector<OccPoint> noisy;
  for (double t : temps) {
    const double sigma = 0.05;
    noisy.push_back({t, bose_einstein(t, kFm) + 0.6 + sigma * rng.gaussian(),
                     sigma});
  }
  const OccupancyFit f1 = fit_occupancy_curve(noisy, kFm);
  CHECK(std::abs(f1.offset_param - 0.6) < 2.0 * f1.offset_ci95);

  CHECK_THROWS_AS(
      fit_occupancy_curve(std::vector<OccPoint>{{1.0, 1.0, 0.0}}, kFm),
      std::domain_error);
}

TEST_CASE("occupancy curve: device-scale 0.7 phonons at 20 mK") {
  // A Fig-4b-like point set: scatter sized so the base-occupancy CI is a
  // few tenths of a phonon.
  const std::vector<double> temps = {0.02, 0.05, 0.1, 0.2, 0.4,
                                     0.8,  1.5,  3.0, 4.5, 6.5};
  Rng rng(20260808);
  std::vector<OccPoint> points;
  for (double t : temps)
    points.push_back({t, bose_einstein(t, kFm) + 0.7 + 0.35 * rng.gaussian(),
                      0.0});
  const OccupancyFit fit = fit_occupancy_curve(points, kFm);
  CHECK(std::abs(fit.n_base - 0.7) <= 0.4);
  CHECK(fit.n_base_ci95 > 0.05);
  CHECK(fit.n_base_ci95 < 0.8);
  CHECK(std::abs(fit.t_device_base - 0.13) <= 0.05);
  CHECK(fit.t_device_ci95 < 0.1);
}

TEST_CASE("occupancy curve: temperature-offset convention") {
  const std::vector<double> temps = {0.02, 0.1, 0.5, 1.5, 3.0, 4.5, 6.5};
  const double dt_true = 0.11;
  std::vector<OccPoint> points;
  for (double t : temps)
    points.push_back({t, bose_einstein(t + dt_true, kFm), 0.0});
  const OccupancyFit fit =
      fit_occupancy_curve(points, kFm, OffsetConvention::temperature);
  CHECK(fit.offset_param == doctest::Approx(dt_true).epsilon(1e-6));
  CHECK(fit.n_base ==
        doctest::Approx(bose_einstein(0.02 + dt_true, kFm)).epsilon(1e-6));
  // 0.13 K device floor when the fridge reads 0.02 K.
  CHECK(fit.t_device_base == doctest::Approx(0.13).epsilon(0.01));
}

TEST_CASE("scale equivariance of the calibration chain") {
  const double scale = 7.3;

  std::vector<double> t, y;
  for (int i = 0; i < 400; ++i) {
    t.push_back(0.25e-6 + i * 8e-9);
    y.push_back(10.0 - 8.0 * std::exp(-1.05e6 * t.back()));
  }
  const HeatingFit base = fit_heating(t, y);
  std::vector<double> y2 = y;
  for (auto& v : y2) v *= scale;
  const HeatingFit scaled = fit_heating(t, y2);
  CHECK(scaled.area_t0 == doctest::Approx(scale * base.area_t0).epsilon(1e-10));
  CHECK(scaled.area_eq == doctest::Approx(scale * base.area_eq).epsilon(1e-10));
  CHECK(scaled.gamma_fit == doctest::Approx(base.gamma_fit).epsilon(1e-10));

  std::vector<CalPoint> pts, pts2;
  for (double t_k : {1.5, 3.0, 4.5, 6.5}) {
    const double a = 0.8e-6 * bose_einstein(t_k, kFm) + 1.18e-6;
    pts.push_back({t_k, a, 0.0});
    pts2.push_back({t_k, scale * a, 0.0});
  }
  const NoiseBudget b1 = fit_calibration(pts, kFm, 1.5);
  const NoiseBudget b2 = fit_calibration(pts2, kFm, 1.5);
  CHECK(b2.alpha == doctest::Approx(scale * b1.alpha).epsilon(1e-12));
  CHECK(b2.beta == doctest::Approx(scale * b1.beta).epsilon(1e-12));
  // Occupancies are scale-free.
  for (double n : {0.7, 95.0})
    CHECK(to_occupancy(b2.alpha * n + b2.beta, b2) ==
          doctest::Approx(to_occupancy(b1.alpha * n + b1.beta, b1))
              .epsilon(1e-12));
}

TEST_CASE("occupancy-fit CI coverage over 200 synthetic replays") {
  const std::vector<double> temps = {0.02, 0.1, 0.5, 1.5, 3.0, 4.5, 6.5};
  const double sigma = 0.1, c_true = 0.6;
  int covered = 0;
  const int runs = 200;
  for (int run = 0; run < runs; ++run) {
    Rng rng = Rng::stream(5150, static_cast<std::uint64_t>(run));
    std::vector<OccPoint> points;
    for (double t : temps)
      points.push_back(
          {t, bose_einstein(t, kFm) + c_true + sigma * rng.gaussian(), sigma});
    const OccupancyFit fit = fit_occupancy_curve(points, kFm);
    if (std::abs(fit.offset_param - c_true) <= fit.offset_ci95) ++covered;
  }
  // 95% nominal coverage; accept the documented 90-99% band.
  CHECK(covered >= static_cast<int>(0.90 * runs));
  CHECK(covered <= static_cast<int>(0.99 * runs));
}
