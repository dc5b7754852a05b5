#pragma once

#include <Eigen/Dense>

namespace wavemgt {

/// Interval (0, length) discretized by n_modes Dirichlet sine modes and an
/// oversampled uniform grid of n_grid interior nodes.
struct DomainSpec {
  double length = 3.141592653589793;
  int n_modes = 16;
  int n_grid = 64;

  /// Throws ValidationError naming the violated bound.
  void validate() const;
};

/// Coordinates of a scalar field in the orthonormal eigenbasis.
struct SpectralField {
  Eigen::VectorXd coeffs;

  SpectralField() = default;
  explicit SpectralField(Eigen::VectorXd c) : coeffs(std::move(c)) {}

  static SpectralField zero(int n) { return SpectralField(Eigen::VectorXd::Zero(n)); }
  /// amp * e_k, with k 1-based.
  static SpectralField mode(int n, int k, double amp = 1.0);

  [[nodiscard]] int size() const { return static_cast<int>(coeffs.size()); }
  [[nodiscard]] bool is_zero() const { return coeffs.isZero(0.0); }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Dirichlet eigenbasis of -d^2/dx^2 on (0, L):
///   e_k(x) = sqrt(2/L) sin(k pi x / L),  lambda_k = (k pi / L)^2.
///
/// The grid consists of the interior nodes x_j = j h, h = L / (n_grid + 1).
/// Quadrature is the composite trapezoid rule on [0, L]; since every field
/// vanishes at the endpoints only the interior nodes carry weight h. On this
/// grid the discrete sine transform is exact for modes k <= n_grid, so the
/// Gram matrix and the transform round trip hold to rounding error.
///
/// Immutable after construction.
class Basis {
 public:
  explicit Basis(const DomainSpec& domain);

  [[nodiscard]] const DomainSpec& domain() const { return domain_; }
  [[nodiscard]] int size() const { return domain_.n_modes; }
  [[nodiscard]] int grid_size() const { return domain_.n_grid; }
  [[nodiscard]] double length() const { return domain_.length; }

  /// lambda_k for k = 1..N is eigenvalues()[k-1].
  [[nodiscard]] const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  [[nodiscard]] double lambda1() const { return eigenvalues_[0]; }
  [[nodiscard]] double normalization() const { return norm_const_; }
  [[nodiscard]] const Eigen::VectorXd& nodes() const { return nodes_; }
  [[nodiscard]] const Eigen::VectorXd& weights() const { return weights_; }
  [[nodiscard]] double spacing() const { return spacing_; }

  /// n_grid x N matrix with entries e_k(x_j).
  [[nodiscard]] const Eigen::MatrixXd& synthesis() const { return synthesis_; }
  /// N x n_grid matrix with entries w_j e_k(x_j).
  [[nodiscard]] const Eigen::MatrixXd& analysis() const { return analysis_; }

  /// Evaluate e_k (1-based k) at an arbitrary point.
  [[nodiscard]] double eigenfunction(int k, double x) const;

  /// Quadrature of grid samples over (0, L).
  [[nodiscard]] double integrate(const Eigen::VectorXd& grid_values) const;

  /// Throws ValidationError unless the field has N coefficients.
  void check(const SpectralField& field) const;

 private:
  DomainSpec domain_;
  double norm_const_ = 0.0;
  double spacing_ = 0.0;
  Eigen::VectorXd eigenvalues_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd synthesis_;
  Eigen::MatrixXd analysis_;
};

Basis build_basis(const DomainSpec& domain);

Eigen::VectorXd to_physical(const SpectralField& field, const Basis& basis);
SpectralField from_physical(const Eigen::VectorXd& values, const Basis& basis);

/// Coefficient k multiplied by -lambda_k.
SpectralField apply_laplacian(const SpectralField& field, const Basis& basis);

/// sum_k lambda_k c_k^2 = ||grad u||_2^2.
double grad_norm_sq(const SpectralField& field, const Basis& basis);

/// L^2 inner product (Euclidean dot product of coefficients).
double l2_inner(const SpectralField& a, const SpectralField& b);

double l2_norm_sq(const SpectralField& a);

/// (int |u|^p)^{1/p} by quadrature on the oversampled grid. Requires p >= 1.
double lp_norm(const SpectralField& field, double p, const Basis& basis);

}  // namespace wavemgt
