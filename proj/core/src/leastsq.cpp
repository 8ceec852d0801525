#include "phonopulse/leastsq.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "phonopulse/errors.hpp"

namespace phonopulse {

namespace {

// Continued-fraction regularized incomplete beta, for the t CDF.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double incbeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double t_cdf(double t, double dof) {
  if (t == 0.0) return 0.5;
  const double x = dof / (dof + t * t);
  const double p = 0.5 * incbeta(0.5 * dof, 0.5, x);
  return t > 0.0 ? 1.0 - p : p;
}

}  // namespace

double student_t_975(double dof) {
  if (!(dof > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double lo = 0.0, hi = 700.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (t_cdf(mid, dof) < 0.975)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  if (a.size() != n * n) throw std::invalid_argument("solve_spd: size mismatch");
  // Cholesky A = L L^T.
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0))
      throw std::runtime_error("solve_spd: matrix not positive definite");
    const double ljj = std::sqrt(diag);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  // Forward then backward substitution.
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * b[k];
    b[ii] = s / a[ii * n + ii];
  }
  return b;
}

FitResult fit_least_squares(std::size_t n_points,
                            const std::vector<double>& initial,
                            const ResidualJacobian& fn,
                            const FitOptions& options) {
  const std::size_t np = initial.size();
  if (np == 0 || n_points < np)
    throw std::invalid_argument("fit_least_squares: more parameters than points");

  std::vector<double> params = initial;
  std::vector<double> r(n_points), jac(n_points * np);

  auto eval_ssr = [&](const std::vector<double>& p, std::vector<double>& res,
                      std::vector<double>& j) {
    fn(p, res, j);
    double s = 0.0;
    for (double v : res) s += v * v;
    return s;
  };

  double ssr = eval_ssr(params, r, jac);
  if (!std::isfinite(ssr))
    throw FitError("fit_least_squares: non-finite residuals at start",
                   std::sqrt(ssr / static_cast<double>(n_points)));

  double lambda = 1e-6;
  bool converged = false;
  int iter = 0;
  std::vector<double> jtj(np * np), jtr(np), trial(np);
  std::vector<double> r_try(n_points), jac_try(n_points * np);

  for (; iter < options.max_iterations && !converged; ++iter) {
    // Normal equations from the current Jacobian.
    for (std::size_t aa = 0; aa < np; ++aa) {
      jtr[aa] = 0.0;
      for (std::size_t bb = 0; bb <= aa; ++bb) jtj[aa * np + bb] = 0.0;
    }
    for (std::size_t i = 0; i < n_points; ++i) {
      const double* row = &jac[i * np];
      for (std::size_t aa = 0; aa < np; ++aa) {
        jtr[aa] += row[aa] * r[i];
        for (std::size_t bb = 0; bb <= aa; ++bb)
          jtj[aa * np + bb] += row[aa] * row[bb];
      }
    }
    for (std::size_t aa = 0; aa < np; ++aa)
      for (std::size_t bb = aa + 1; bb < np; ++bb)
        jtj[aa * np + bb] = jtj[bb * np + aa];

    bool accepted = false;
    for (int damp = 0; damp < 40 && !accepted; ++damp) {
      std::vector<double> m = jtj;
      for (std::size_t aa = 0; aa < np; ++aa) {
        const double d = jtj[aa * np + aa];
        m[aa * np + aa] = d + lambda * (d > 0.0 ? d : 1.0);
      }
      std::vector<double> step;
      try {
        step = solve_spd(std::move(m), jtr);
      } catch (const std::runtime_error&) {
        lambda *= 10.0;
        continue;
      }
      for (std::size_t aa = 0; aa < np; ++aa) trial[aa] = params[aa] + step[aa];
      const double ssr_try = eval_ssr(trial, r_try, jac_try);
      if (std::isfinite(ssr_try) && ssr_try <= ssr) {
        double rel_step = 0.0;
        for (std::size_t aa = 0; aa < np; ++aa) {
          const double scale = std::abs(params[aa]) + 1e-300;
          rel_step = std::max(rel_step, std::abs(step[aa]) / scale);
        }
        params = trial;
        ssr = ssr_try;
        r.swap(r_try);
        jac.swap(jac_try);
        lambda = std::max(lambda / 3.0, 1e-14);
        accepted = true;
        if (rel_step < options.step_tolerance) converged = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) {
      // No downhill step available; treat the current point as the optimum.
      converged = true;
    }
  }

  FitResult out;
  out.params = params;
  out.n_points = n_points;
  out.iterations = iter;
  out.converged = converged;
  out.ssr = ssr;
  out.residual_rms = std::sqrt(ssr / static_cast<double>(n_points));
  if (!converged)
    throw FitError("fit_least_squares: no convergence within iteration budget",
                   out.residual_rms);

  // Residual-scaled covariance (J^T J)^(-1) * ssr / dof at the optimum.
  out.covariance.assign(np * np, std::numeric_limits<double>::quiet_NaN());
  out.ci95.assign(np, std::numeric_limits<double>::quiet_NaN());
  const double dof = static_cast<double>(n_points) - static_cast<double>(np);
  if (dof > 0.0) {
    std::vector<double> jtj2(np * np, 0.0);
    for (std::size_t i = 0; i < n_points; ++i) {
      const double* row = &jac[i * np];
      for (std::size_t aa = 0; aa < np; ++aa)
        for (std::size_t bb = 0; bb < np; ++bb)
          jtj2[aa * np + bb] += row[aa] * row[bb];
    }
    const double sigma2 = ssr / dof;
    try {
      for (std::size_t col = 0; col < np; ++col) {
        std::vector<double> e(np, 0.0);
        e[col] = 1.0;
        auto x = solve_spd(jtj2, e);
        for (std::size_t row_i = 0; row_i < np; ++row_i)
          out.covariance[row_i * np + col] = x[row_i] * sigma2;
      }
      const double tq = student_t_975(dof);
      for (std::size_t aa = 0; aa < np; ++aa)
        out.ci95[aa] = tq * std::sqrt(std::max(out.covariance[aa * np + aa], 0.0));
    } catch (const std::runtime_error&) {
      // Singular J^T J: covariance left as NaN, parameters still valid.
    }
  }
  return out;
}

LinearFit weighted_linear_fit(std::span<const double> x,
                              std::span<const double> y,
                              std::span<const double> sigma) {
  const std::size_t n = x.size();
  if (y.size() != n) throw std::invalid_argument("weighted_linear_fit: x/y size");
  if (!sigma.empty() && sigma.size() != n)
    throw std::invalid_argument("weighted_linear_fit: sigma size");
  if (n < 2) throw std::domain_error("weighted_linear_fit: need >= 2 points");

  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (!sigma.empty()) {
      if (!(sigma[i] > 0.0))
        throw std::invalid_argument("weighted_linear_fit: sigma must be > 0");
      w = 1.0 / (sigma[i] * sigma[i]);
    }
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
    swxx += w * x[i] * x[i];
    swxy += w * x[i] * y[i];
  }
  const double det = sw * swxx - swx * swx;
  if (!(std::abs(det) > 0.0))
    throw std::domain_error("weighted_linear_fit: degenerate abscissas");

  LinearFit fit;
  fit.n_points = n;
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swxx * swy - swx * swxy) / det;

  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.slope * x[i] - fit.intercept;
    const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
    ssr += w * r * r;
  }
  fit.residual_rms = std::sqrt(ssr / static_cast<double>(n));

  const double dof = static_cast<double>(n) - 2.0;
  if (dof > 0.0) {
    const double scale = ssr / dof;  // ~1 when sigmas are honest
    fit.cov_ss = scale * sw / det;
    fit.cov_ii = scale * swxx / det;
    fit.cov_si = -scale * swx / det;
    const double tq = student_t_975(dof);
    fit.slope_ci95 = tq * std::sqrt(fit.cov_ss);
    fit.intercept_ci95 = tq * std::sqrt(fit.cov_ii);
  } else {
    fit.cov_ss = fit.cov_ii = fit.cov_si = 0.0;
    fit.slope_ci95 = fit.intercept_ci95 =
        std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

}  // namespace phonopulse
