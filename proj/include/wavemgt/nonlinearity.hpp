#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavemgt/spectral_basis.hpp"

namespace wavemgt {

/// The logarithmic source f(s) = |s|^{gamma-2} s ln|s|.
///
/// gamma > 2 always. When a spatial dimension n >= 3 is declared the
/// subcritical bound gamma < 2(n-1)/(n-2) is enforced as well; in one
/// dimension every gamma > 2 is admissible.
struct LogSource {
  double gamma = 2.5;
  std::optional<int> dimension;

  void validate() const;
};

/// |s| below this is treated as zero (continuous extension of f, F, f').
inline constexpr double kZeroCutoff = 1e-300;

double f_eval(double s, const LogSource& src);
/// F(s) = (1/gamma)|s|^gamma ln|s| - (1/gamma^2)|s|^gamma, F(0) = 0.
double F_eval(double s, const LogSource& src);
/// f'(s) = |s|^{gamma-2}((gamma-1) ln|s| + 1), f'(0) = 0.
double f_prime(double s, const LogSource& src);

/// Galerkin projection P_N f(u): synthesize u on the oversampled grid,
/// evaluate f pointwise, project back onto the first N modes.
SpectralField apply_f(const SpectralField& field, const LogSource& src, const Basis& basis);

/// Grid integrals of a field that the energy and the well functionals share.
struct SourceMoments {
  double log_moment = 0.0;    ///< int |u|^gamma ln|u|
  double gamma_moment = 0.0;  ///< ||u||_gamma^gamma
  double abs_log_moment = 0.0;  ///< int |u|^gamma |ln|u||

  /// int F(u) = log_moment / gamma - gamma_moment / gamma^2.
  [[nodiscard]] double primitive(double gamma) const {
    return log_moment / gamma - gamma_moment / (gamma * gamma);
  }
};

SourceMoments source_moments(const SpectralField& field, const LogSource& src,
                             const Basis& basis);
SourceMoments source_moments_grid(const Eigen::VectorXd& grid_values, const LogSource& src,
                                  const Basis& basis);

/// int F(u) dx by the basis quadrature.
double potential_integral(const SpectralField& field, const LogSource& src, const Basis& basis);

// ---------------------------------------------------------------------------
// epsilon-absorption of the logarithm
// ---------------------------------------------------------------------------

/// Constants of the bounds
///   |s|^g |ln|s|| <= eps s^2 + C_eps |s|^{g+eta}                    (log)
///   int |u|^g |ln|u|| <= eps/lambda_1 ||grad u||^2
///                        + C_S C_eps ||grad u||^{g+eta}             (integral)
///   |f(s)| <= eps |s| + C_eps |s|^{g-1+eta}                         (source)
///   |F(s)| <= eps s^2 + C_eps |s|^{g+eta}                           (primitive)
/// where C_S bounds int |u|^{g+eta} <= C_S ||grad u||^{g+eta} on H^1_0.
struct AbsorptionConstants {
  double eta = 0.5;
  double eps = 0.1;
  double c_eps = 1.0;
  double c_sobolev = 1.0;

  void validate(const LogSource& src) const;
};

enum class AbsorptionBound { Log, Integral, Source, Primitive };

std::string to_string(AbsorptionBound b);

struct AbsorptionViolation {
  AbsorptionBound bound;
  double s;  ///< sample point (amplitude for the integral bound)
  double lhs;
  double rhs;
};

struct AbsorptionReport {
  std::size_t checks = 0;
  /// max over all checks of (lhs - rhs) / max(1, |rhs|); negative when every bound holds.
  double worst_margin = -std::numeric_limits<double>::infinity();
  std::vector<AbsorptionViolation> violations;

  [[nodiscard]] bool passed() const { return violations.empty(); }
  void merge(const AbsorptionReport& other);
};

/// Pointwise check of the log, source and primitive bounds on the samples.
AbsorptionReport check_absorption(std::span<const double> samples, const LogSource& src,
                                  const AbsorptionConstants& consts);

/// Integral bound for the fields s * profile, s ranging over the amplitudes.
AbsorptionReport check_integral_absorption(std::span<const SpectralField> profiles,
                                           std::span<const double> amplitudes,
                                           const LogSource& src,
                                           const AbsorptionConstants& consts,
                                           const Basis& basis);

struct AbsorptionCalibration {
  double c_eps = 0.0;           ///< smallest constant passing the scan (with 1e-9 headroom)
  double c_log = 0.0;           ///< scan maximum for the log bound alone
  double c_primitive = 0.0;     ///< scan maximum for the primitive bound alone
  double delta = 0.0;           ///< split point: s^{g-2}|ln s| <= eps on (0, delta]
  double c_eps_analytic = 0.0;  ///< max(|ln delta| delta^{-eta}, 1/(e eta)) from the split
};

/// Log-spaced points in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// Smallest C_eps passing a dense log-spaced scan of s in [lo, hi], plus
/// the constant obtained from the small-s/large-s split.
AbsorptionCalibration calibrate_absorption(const LogSource& src, double eps, double eta,
                                           double lo = 1e-8, double hi = 1e3,
                                           std::size_t count = 100000);

}  // namespace wavemgt
