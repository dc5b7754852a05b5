#include "wavemgt/spectral_basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "wavemgt/error.hpp"

namespace wavemgt {

void DomainSpec::validate() const {
  std::ostringstream msg;
  if (!(length > 0.0) || !std::isfinite(length)) {
    msg << "domain length > 0 violated: " << length;
  } else if (n_modes < 1) {
    msg << "n_modes >= 1 violated: " << n_modes;
  } else if (n_grid < 2 * n_modes) {
    msg << "n_grid >= 2*n_modes violated: " << n_grid << " < " << 2 * n_modes;
  } else {
    return;
  }
  throw ValidationError(msg.str());
}

SpectralField SpectralField::mode(int n, int k, double amp) {
  if (k < 1 || k > n) {
    std::ostringstream msg;
    msg << "mode index " << k << " outside 1.." << n;
    throw ValidationError(msg.str());
  }
  SpectralField f = zero(n);
  f.coeffs[k - 1] = amp;
  return f;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  coeffs += o.coeffs;
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  coeffs -= o.coeffs;
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  coeffs *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

Basis::Basis(const DomainSpec& domain) : domain_(domain) {
  domain_.validate();
  const int n = domain_.n_modes;
  const int g = domain_.n_grid;
  const double len = domain_.length;
  const double pi = std::numbers::pi;

  norm_const_ = std::sqrt(2.0 / len);
  spacing_ = len / static_cast<double>(g + 1);

  eigenvalues_.resize(n);
  for (int k = 1; k <= n; ++k) {
    const double kk = k * pi / len;
    eigenvalues_[k - 1] = kk * kk;
  }

  nodes_.resize(g);
  weights_ = Eigen::VectorXd::Constant(g, spacing_);
  for (int j = 1; j <= g; ++j) nodes_[j - 1] = j * spacing_;

  // sin(k j pi / (g+1)) evaluated from the integer product keeps the
  // argument reduction exact.
  synthesis_.resize(g, n);
  for (int k = 1; k <= n; ++k) {
    for (int j = 1; j <= g; ++j) {
      const long kj = static_cast<long>(k) * j % (2L * (g + 1));
      synthesis_(j - 1, k - 1) = norm_const_ * std::sin(pi * kj / static_cast<double>(g + 1));
    }
  }
  analysis_ = synthesis_.transpose() * spacing_;
}

double Basis::eigenfunction(int k, double x) const {
  return norm_const_ * std::sin(k * std::numbers::pi * x / domain_.length);
}

double Basis::integrate(const Eigen::VectorXd& grid_values) const {
  if (grid_values.size() != domain_.n_grid) {
    throw ValidationError("grid values size mismatch");
  }
  return spacing_ * grid_values.sum();
}

void Basis::check(const SpectralField& field) const {
  if (field.size() != domain_.n_modes) {
    std::ostringstream msg;
    msg << "field has " << field.size() << " coefficients, basis has " << domain_.n_modes;
    throw ValidationError(msg.str());
  }
}

Basis build_basis(const DomainSpec& domain) { return Basis(domain); }

Eigen::VectorXd to_physical(const SpectralField& field, const Basis& basis) {
  basis.check(field);
  return basis.synthesis() * field.coeffs;
}

SpectralField from_physical(const Eigen::VectorXd& values, const Basis& basis) {
  if (values.size() != basis.grid_size()) {
    std::ostringstream msg;
    msg << "grid values have " << values.size() << " entries, basis grid has "
        << basis.grid_size();
    throw ValidationError(msg.str());
  }
  return SpectralField(basis.analysis() * values);
}

SpectralField apply_laplacian(const SpectralField& field, const Basis& basis) {
  basis.check(field);
  return SpectralField(-basis.eigenvalues().cwiseProduct(field.coeffs));
}

double grad_norm_sq(const SpectralField& field, const Basis& basis) {
  basis.check(field);
  return basis.eigenvalues().dot(field.coeffs.cwiseAbs2());
}

double l2_inner(const SpectralField& a, const SpectralField& b) {
  if (a.size() != b.size()) throw ValidationError("l2_inner: size mismatch");
  return a.coeffs.dot(b.coeffs);
}

double l2_norm_sq(const SpectralField& a) { return a.coeffs.squaredNorm(); }

double lp_norm(const SpectralField& field, double p, const Basis& basis) {
  if (!(p >= 1.0)) {
    std::ostringstream msg;
    msg << "lp_norm requires p >= 1, got " << p;
    throw ValidationError(msg.str());
  }
  const Eigen::VectorXd v = to_physical(field, basis);
  const double integral = basis.integrate(v.array().abs().pow(p).matrix());
  return std::pow(integral, 1.0 / p);
}

}  // namespace wavemgt
