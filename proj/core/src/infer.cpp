#include "phonopulse/infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "phonopulse/constants.hpp"
#include "phonopulse/errors.hpp"
#include "phonopulse/leastsq.hpp"

namespace phonopulse {

namespace {

struct ExpSeed {
  double a_eq, d_a, gamma;
  bool crossing_found;
};

// Seeds: A_eq from the tail mean, A_0 from the first valid sample, Gamma
// from the 1/e crossing of the transient.
ExpSeed seed_exponential(std::span<const double> t, std::span<const double> y) {
  const std::size_t n = t.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 4);
  double a_eq = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) a_eq += y[i];
  a_eq /= static_cast<double>(tail);
  const double a_first = y.front();
  const double d_first = a_first - a_eq;

  ExpSeed seed{a_eq, 0.0, 0.0, false};
  const double scale = std::abs(a_eq) + std::abs(a_first);
  const double target = a_eq + d_first * std::exp(-1.0);
  if (std::abs(d_first) > 1e-12 * scale) {
    for (std::size_t i = 1; i < n; ++i) {
      const bool crossed = d_first > 0.0 ? y[i] <= target : y[i] >= target;
      if (crossed && t[i] > 0.0) {
        seed.gamma = 1.0 / t[i];
        seed.crossing_found = true;
        break;
      }
    }
  }
  if (!seed.crossing_found) seed.gamma = 2.0 / (t.back() - t.front() + 1e-300);
  // Back out A_0 at t = 0 from the first sample and the seeded rate.
  seed.d_a = d_first / std::exp(-seed.gamma * t.front());
  return seed;
}

struct ExpFitRaw {
  double a_eq, d_a, gamma;
  double ci_a_eq, ci_d_a, ci_gamma, cov_eq_da;
  double residual_rms;
  bool converged;
};

ExpFitRaw fit_exponential(std::span<const double> t, std::span<const double> y,
                          std::span<const double> se, const ExpSeed& seed) {
  const std::size_t n = t.size();
  std::vector<double> w(n, 1.0);
  if (!se.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(se[i] > 0.0)) { w.assign(n, 1.0); break; }
      w[i] = 1.0 / se[i];
    }
  }

  auto callback = [&](const std::vector<double>& p, std::vector<double>& r,
                      std::vector<double>& jac) {
    const double a_eq = p[0], d_a = p[1], g = p[2];
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-g * t[i]);
      const double model = a_eq + d_a * e;
      r[i] = w[i] * (y[i] - model);
      jac[i * 3 + 0] = w[i] * 1.0;
      jac[i * 3 + 1] = w[i] * e;
      jac[i * 3 + 2] = w[i] * (-d_a * t[i] * e);
    }
  };

  const FitResult res = fit_least_squares(
      n, {seed.a_eq, seed.d_a, seed.gamma}, callback);
  ExpFitRaw out;
  out.a_eq = res.params[0];
  out.d_a = res.params[1];
  out.gamma = res.params[2];
  out.ci_a_eq = res.ci95[0];
  out.ci_d_a = res.ci95[1];
  out.ci_gamma = res.ci95[2];
  out.cov_eq_da = res.covariance.empty()
                      ? std::numeric_limits<double>::quiet_NaN()
                      : res.covariance[0 * 3 + 1];
  out.residual_rms = res.residual_rms;
  out.converged = res.converged;
  return out;
}

double weighted_mean(std::span<const double> y, std::span<const double> se,
                     double* se_out) {
  double sw = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double w = (!se.empty() && se[i] > 0.0) ? 1.0 / (se[i] * se[i]) : 1.0;
    sw += w;
    swy += w * y[i];
  }
  const double mean = swy / sw;
  if (se_out) {
    // Scatter-based error of the mean.
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double nn = static_cast<double>(y.size());
    *se_out = std::sqrt(ss / (nn - 1.0) / nn);
  }
  return mean;
}

}  // namespace

HeatingFit fit_heating(std::span<const double> t, std::span<const double> area,
                       std::span<const double> area_se) {
  if (t.size() != area.size())
    throw std::invalid_argument("fit_heating: t/area size mismatch");
  if (t.size() < 20)
    throw std::domain_error("fit_heating: need at least 20 valid points");

  const ExpSeed seed = seed_exponential(t, area);
  HeatingFit fit;
  fit.n_points = t.size();

  const double span = t.back() - t.front();
  bool fit_failed = false;
  ExpFitRaw raw{};
  try {
    raw = fit_exponential(t, area, area_se, seed);
  } catch (const FitError&) {
    // A transient the optimizer cannot pin down (flat data, noise blips)
    // lands in the constant-model fallback below.
    fit_failed = true;
  }
  if (!fit_failed) {
    fit.area_eq = raw.a_eq;
    fit.gamma_fit = raw.gamma;
    fit.area_t0 = raw.a_eq + raw.d_a;
    fit.residual_rms = raw.residual_rms;
    fit.gamma_ci95 = raw.ci_gamma;
    fit.area_eq_ci95 = raw.ci_a_eq;
    // Var(A_0) = Var(A_eq) + Var(dA) + 2 Cov.
    fit.se_dof = static_cast<double>(t.size()) - 3.0;
    if (std::isfinite(raw.ci_a_eq) && std::isfinite(raw.ci_d_a)) {
      const double tq = student_t_975(fit.se_dof);
      const double var_eq = std::pow(raw.ci_a_eq / tq, 2);
      const double var_da = std::pow(raw.ci_d_a / tq, 2);
      const double cov = std::isfinite(raw.cov_eq_da) ? raw.cov_eq_da : 0.0;
      fit.area_t0_se = std::sqrt(std::max(var_eq + var_da + 2.0 * cov, 0.0));
      fit.area_t0_ci95 = tq * fit.area_t0_se;
    } else {
      fit.area_t0_ci95 = std::numeric_limits<double>::quiet_NaN();
      fit.area_t0_se = std::numeric_limits<double>::quiet_NaN();
    }
  }

  // Degenerate when the transient is unidentifiable: no 1/e crossing, a
  // rate that the span cannot resolve, or an amplitude consistent with zero.
  fit.ill_conditioned = fit_failed || !seed.crossing_found ||
                        raw.gamma * span < 0.5 || !(raw.gamma > 0.0) ||
                        !(std::abs(raw.d_a) > raw.ci_d_a);
  if (fit.ill_conditioned) {
    // Degenerate transient: fall back to the constant model.
    double mean_se = 0.0;
    const double mean = weighted_mean(area, area_se, &mean_se);
    fit.area_t0 = fit.area_eq = mean;
    fit.se_dof = static_cast<double>(area.size()) - 1.0;
    const double tq = student_t_975(fit.se_dof);
    fit.area_t0_se = mean_se;
    fit.area_t0_ci95 = fit.area_eq_ci95 = tq * mean_se;
    fit.gamma_ci95 = std::numeric_limits<double>::infinity();
    double ss = 0.0;
    for (double v : area) ss += (v - mean) * (v - mean);
    fit.residual_rms = std::sqrt(ss / static_cast<double>(area.size()));
  }
  return fit;
}

namespace {

// Filter-response compensation factor L(Gamma) / chi(Gamma); identity when
// the rate is outside the range the tap algebra can represent.
double transient_compensation(const PeakAreaSeries& series, double gamma) {
  if (series.filter_taps.empty() || !(series.dt > 0.0)) return 1.0;
  if (!(gamma > 0.0) || gamma * series.dt > 0.5) return 1.0;
  const double l_pass =
      ou_passband_fraction(series.filter_taps, gamma, series.dt);
  const double chi = ou_transient_gain(series.filter_taps, gamma, series.dt);
  return l_pass / chi;
}

}  // namespace

HeatingFit fit_heating(const PeakAreaSeries& series) {
  HeatingFit fit = fit_heating(series.t, series.area, series.area_se);

  // Compensate the transient transmission of the analysis filter: the
  // stationary level passes with the in-band fraction L(Gamma) while the
  // e^(-Gamma t) component passes with gain chi(Gamma).
  if (!fit.ill_conditioned) {
    const double rho = transient_compensation(series, fit.gamma_fit);
    fit.area_t0 = fit.area_eq + (fit.area_t0 - fit.area_eq) * rho;
  }

  // Parameter uncertainties by delete-one-group jackknife of the full
  // estimator. Fitting each group alone would mix in degenerate sub-fits;
  // the delete-one means stay as well conditioned as the full series.
  const std::size_t k = series.group_area.size();
  if (k >= 4) {
    const double kk = static_cast<double>(k);
    std::vector<double> j_t0(k), j_eq(k), j_gamma(k);
    std::vector<double> loo(series.t.size());
    bool ok = true;
    const ExpSeed main_seed{fit.area_eq, fit.area_t0 - fit.area_eq,
                            fit.ill_conditioned ? 0.0 : fit.gamma_fit, true};
    for (std::size_t gi = 0; gi < k && ok; ++gi) {
      for (std::size_t p = 0; p < loo.size(); ++p)
        loo[p] = (kk * series.area[p] - series.group_area[gi][p]) / (kk - 1.0);
      if (fit.ill_conditioned) {
        j_t0[gi] = j_eq[gi] = weighted_mean(loo, series.area_se, nullptr);
        j_gamma[gi] = 0.0;
        continue;
      }
      try {
        const ExpFitRaw raw =
            fit_exponential(series.t, loo, series.area_se, main_seed);
        const double rho = transient_compensation(series, raw.gamma);
        j_eq[gi] = raw.a_eq;
        j_gamma[gi] = raw.gamma;
        j_t0[gi] = raw.a_eq + raw.d_a * rho;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (ok) {
      auto jackknife_se = [&](const std::vector<double>& v) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / kk;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::sqrt((kk - 1.0) / kk * ss);
      };
      fit.se_dof = kk - 1.0;
      const double tq = student_t_975(fit.se_dof);
      fit.area_t0_se = jackknife_se(j_t0);
      fit.area_t0_ci95 = tq * fit.area_t0_se;
      fit.area_eq_ci95 = tq * jackknife_se(j_eq);
      if (!fit.ill_conditioned) fit.gamma_ci95 = tq * jackknife_se(j_gamma);
      fit.scatter_ci = true;
    }
  }
  return fit;
}

NoiseBudget fit_calibration(std::span<const CalPoint> points, double f_m,
                            double t_min_k, int min_points) {
  if (min_points < 2)
    throw std::invalid_argument("fit_calibration: min_points must be >= 2");
  std::vector<double> x, y, sigma;
  bool have_sigma = true;
  for (const auto& p : points) {
    if (p.temperature_k < t_min_k) continue;
    x.push_back(bose_einstein(p.temperature_k, f_m));
    y.push_back(p.area_t0);
    sigma.push_back(p.sigma);
    if (!(p.sigma > 0.0)) have_sigma = false;
  }
  if (x.size() < static_cast<std::size_t>(min_points))
    throw std::domain_error(
        "fit_calibration: fewer than " + std::to_string(min_points) +
        " points with T >= " + std::to_string(t_min_k) + " K");

  const LinearFit lin = weighted_linear_fit(
      x, y, have_sigma ? std::span<const double>(sigma) : std::span<const double>{});

  NoiseBudget budget;
  budget.alpha = lin.slope;
  budget.beta = lin.intercept;
  budget.alpha_ci95 = lin.slope_ci95;
  budget.beta_ci95 = lin.intercept_ci95;
  budget.cov_aa = lin.cov_ss;
  budget.cov_bb = lin.cov_ii;
  budget.cov_ab = lin.cov_si;
  budget.residual_rms = lin.residual_rms;
  budget.n_points = lin.n_points;
  if (!(budget.alpha > 0.0))
    throw FitError("fit_calibration: non-positive conversion factor alpha",
                   lin.residual_rms);
  return budget;
}

double to_occupancy(double area_t0, const NoiseBudget& budget) {
  if (!(budget.alpha > 0.0))
    throw std::domain_error("to_occupancy: alpha must be > 0");
  return (area_t0 - budget.beta) / budget.alpha;
}

double imprecision_split(double beta, double offres_area) {
  if (offres_area < 0.0)
    throw std::domain_error("imprecision_split: off-resonance area must be >= 0");
  if (offres_area > beta)
    throw std::domain_error(
        "imprecision_split: off-resonance area exceeds total beta");
  if (offres_area == beta) return std::numeric_limits<double>::infinity();
  return offres_area / (beta - offres_area);
}

OccupancyFit fit_occupancy_curve(std::span<const OccPoint> points, double f_m,
                                 OffsetConvention convention) {
  const std::size_t n = points.size();
  if (n < 4)
    throw std::domain_error("fit_occupancy_curve: need at least 4 points");

  std::vector<double> temps(n), occ(n), w(n, 1.0), be(n);
  bool have_sigma = true;
  double t_min = points[0].temperature_k;
  for (std::size_t i = 0; i < n; ++i) {
    temps[i] = points[i].temperature_k;
    occ[i] = points[i].occupancy;
    t_min = std::min(t_min, temps[i]);
    be[i] = bose_einstein(temps[i], f_m);
    if (!(points[i].sigma > 0.0)) have_sigma = false;
  }
  if (have_sigma)
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / points[i].sigma;

  OccupancyFit fit;
  fit.convention = convention;
  fit.n_points = n;

  double dof = static_cast<double>(n) - 1.0;
  double d_base_d_param = 1.0;  // sensitivity of n_base to the offset param

  if (convention == OffsetConvention::occupancy) {
    auto callback = [&](const std::vector<double>& p, std::vector<double>& r,
                        std::vector<double>& jac) {
      for (std::size_t i = 0; i < n; ++i) {
        r[i] = w[i] * (occ[i] - (be[i] + p[0]));
        jac[i] = w[i];
      }
    };
    double seed = occ[0] - be[0];
    for (std::size_t i = 0; i < n; ++i)
      if (temps[i] == t_min) seed = occ[i] - be[i];
    const FitResult res = fit_least_squares(n, {seed}, callback);
    fit.offset_param = res.params[0];
    fit.offset_ci95 = res.ci95[0];
    fit.residual_rms = res.residual_rms;
    fit.n_base = bose_einstein(t_min, f_m) + fit.offset_param;
    d_base_d_param = 1.0;
  } else {
    auto callback = [&](const std::vector<double>& p, std::vector<double>& r,
                        std::vector<double>& jac) {
      for (std::size_t i = 0; i < n; ++i) {
        const double t_dev = temps[i] + p[0];
        if (!(t_dev > 0.0)) {
          r[i] = 1e100;
          jac[i] = 0.0;
          continue;
        }
        const double model = bose_einstein(t_dev, f_m);
        // dn/dT = (theta / T^2) e^x / (e^x - 1)^2, x = theta / T.
        const double theta = kPlanck * f_m / kBoltzmann;
        const double x = theta / t_dev;
        const double ex = std::exp(x);
        const double dn_dt = theta / (t_dev * t_dev) * ex /
                             ((ex - 1.0) * (ex - 1.0));
        r[i] = w[i] * (occ[i] - model);
        jac[i] = w[i] * dn_dt;
      }
    };
    // Seed from the lowest-temperature residual.
    double n_low = occ[0];
    for (std::size_t i = 0; i < n; ++i)
      if (temps[i] == t_min) n_low = occ[i];
    double seed = 0.0;
    if (n_low > 0.0)
      seed = bose_einstein_temperature(n_low, f_m) - t_min;
    const FitResult res = fit_least_squares(n, {seed}, callback);
    fit.offset_param = res.params[0];
    fit.offset_ci95 = res.ci95[0];
    fit.residual_rms = res.residual_rms;
    fit.n_base = bose_einstein(t_min + fit.offset_param, f_m);
    const double theta = kPlanck * f_m / kBoltzmann;
    const double t_dev = t_min + fit.offset_param;
    const double x = theta / t_dev;
    const double ex = std::exp(x);
    d_base_d_param = theta / (t_dev * t_dev) * ex / ((ex - 1.0) * (ex - 1.0));
  }
  (void)dof;

  fit.n_base_ci95 = std::abs(d_base_d_param) * fit.offset_ci95;
  if (fit.n_base > 0.0) {
    fit.t_device_base = bose_einstein_temperature(fit.n_base, f_m);
    // dT/dn via the inverse-function derivative.
    const double theta = kPlanck * f_m / kBoltzmann;
    const double lg = std::log1p(1.0 / fit.n_base);
    const double dt_dn =
        theta / (lg * lg) / (fit.n_base * fit.n_base + fit.n_base);
    fit.t_device_ci95 = dt_dn * fit.n_base_ci95;
  } else {
    fit.t_device_base = 0.0;
    fit.t_device_ci95 = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

}  // namespace phonopulse
