#pragma once

#include <Eigen/Dense>

#include "wavemgt/dynamics.hpp"

namespace wavemgt::experiments {

/// Nodal values of the five first-order fields on the interior FD nodes.
struct FdState {
  Eigen::VectorXd u, p, w, m, q;
  double t = 0.0;

  [[nodiscard]] bool all_finite() const;
};

/// Independent discretization of the same first-order system: second-order
/// centred differences on a uniform Dirichlet grid, pointwise source, RK4.
class FdSolver {
 public:
  /// `nodes` counts both boundary nodes; the unknowns live on nodes - 2
  /// interior points x_j = j h, h = L / (nodes - 1).
  FdSolver(const ModelParams& params, int nodes);

  [[nodiscard]] int interior() const { return static_cast<int>(x_.size()); }
  [[nodiscard]] double spacing() const { return h_; }
  [[nodiscard]] const Eigen::VectorXd& nodes() const { return x_; }

  /// Largest RK4-stable step for the discrete operator, with the same
  /// c = 1 guard as the spectral solver.
  [[nodiscard]] double stability_ceiling() const;

  /// Samples a spectral state at the FD nodes.
  [[nodiscard]] FdState sample(const SystemState& s, const Basis& basis) const;

  /// Throws BlowupError on non-finite values.
  [[nodiscard]] FdState step(const FdState& s, double dt) const;

  /// Discrete sine projection onto e_1..e_n (trapezoid weights h).
  [[nodiscard]] SpectralField restrict_to(const Eigen::VectorXd& nodal, int n_modes) const;

 private:
  [[nodiscard]] Eigen::VectorXd laplacian(const Eigen::VectorXd& v) const;
  [[nodiscard]] FdState rate(const FdState& s) const;

  ModelParams params_;
  double h_;
  Eigen::VectorXd x_;
};

}  // namespace wavemgt::experiments
