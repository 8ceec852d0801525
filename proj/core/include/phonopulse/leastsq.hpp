#pragma once

#include <functional>
#include <span>
#include <vector>

namespace phonopulse {

/// Fills residuals r_i = y_i - f(x_i, p) and the Jacobian of f,
/// J[i * n_params + k] = d f(x_i, p) / d p_k. Row-major, analytic.
using ResidualJacobian =
    std::function<void(const std::vector<double>& params,
                       std::vector<double>& residuals, std::vector<double>& jac)>;

struct FitOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;  ///< relative parameter step
};

struct FitResult {
  std::vector<double> params;
  std::vector<double> ci95;        ///< per-parameter 95% half-widths
  std::vector<double> covariance;  ///< n_params x n_params, row-major
  double residual_rms = 0.0;
  double ssr = 0.0;
  std::size_t n_points = 0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton on a residual/Jacobian callback. Steps solve
/// (J^T J + lambda diag(J^T J)) d = J^T r with multiplicative damping
/// adjustment; iteration stops when the relative step drops below
/// options.step_tolerance. Parameter covariance is the residual-scaled
/// (J^T J)^(-1) at the optimum and ci95 is the Student-t 95% interval.
FitResult fit_least_squares(std::size_t n_points,
                            const std::vector<double>& initial,
                            const ResidualJacobian& fn,
                            const FitOptions& options = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_ci95 = 0.0;
  double intercept_ci95 = 0.0;
  double cov_ss = 0.0, cov_ii = 0.0, cov_si = 0.0;
  double residual_rms = 0.0;
  std::size_t n_points = 0;
};

/// Weighted straight-line fit y = slope * x + intercept. `sigma` may be
/// empty (uniform weights). Covariance is residual-scaled when dof > 0.
LinearFit weighted_linear_fit(std::span<const double> x,
                              std::span<const double> y,
                              std::span<const double> sigma = {});

/// Solve A x = b for a symmetric positive definite A (n x n, row-major).
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b);

/// Student-t two-sided 95% quantile (0.975 point) for `dof` degrees of freedom.
double student_t_975(double dof);

}  // namespace phonopulse
