#pragma once

#include <functional>

#include <Eigen/Dense>

namespace wavemgt {

struct NelderMeadOptions {
  int max_evals = 4000;
  double initial_step = 0.5;
  /// Stop when the spread of simplex values falls below f_tol * (1 + |f_best|).
  double f_tol = 1e-12;
  /// ...and the simplex diameter below x_tol.
  double x_tol = 1e-9;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evals = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization (standard reflection, expansion,
/// contraction and shrink coefficients 1, 2, 1/2, 1/2). The best value is
/// never worse than f(x0).
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& opts = {});

}  // namespace wavemgt
