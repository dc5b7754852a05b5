#pragma once

#include <array>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wavemgt/model_params.hpp"

namespace wavemgt {

using cplx = std::complex<double>;

/// P(s) = (s^2 + lam)(tau s^3 + s^2 + b lam s + lam) - alpha^2 (1 + tau s),
/// the characteristic polynomial of the linearized system on one mode.
///
/// Expanded: tau s^5 + s^4 + (b+tau) lam s^3 + 2 lam s^2
///           + (b lam^2 - alpha^2 tau) s + lam^2 - alpha^2.
struct CharPoly {
  std::array<double, 6> coeffs{};  ///< c_0 .. c_5
  double lambda = 0.0;
  double tau = 0.0;
  double b = 0.0;
  double alpha = 0.0;

  [[nodiscard]] cplx eval_expanded(cplx s) const;
  [[nodiscard]] cplx eval_factored(cplx s) const;
  [[nodiscard]] cplx derivative_factored(cplx s) const;
  /// P(sigma i sqrt(lam) + delta), written so that the cancellation
  /// s^2 + lam = 2 sigma i omega delta + delta^2 happens symbolically.
  [[nodiscard]] cplx eval_offset(int sigma, cplx delta) const;
  [[nodiscard]] cplx derivative_offset(int sigma, cplx delta) const;
  /// sum_j |c_j| |s|^j, the magnitude scale used for residual checks.
  [[nodiscard]] double scale_at(cplx s) const;
};

/// Uses tau, b, alpha from params; lambda is a free continuous parameter.
CharPoly char_poly(double lambda, const ModelParams& params);

struct RootSet {
  std::array<cplx, 5> roots{};
  std::array<bool, 5> polished{};  ///< false when Newton did not converge
  std::array<double, 5> residual{};  ///< |P(root)| / scale_at(root)
};

/// Companion-matrix eigenvalues of the polynomial in s / sqrt(lam), rescaled
/// and polished by at most 20 Newton steps on the factored form.
RootSet poly_roots(const CharPoly& poly);

struct BranchSplit {
  std::array<cplx, 2> wave{};  ///< [0] nearest +i sqrt(lam), [1] nearest -i sqrt(lam)
  std::array<cplx, 3> mgt{};
  bool ambiguous = false;
};

/// Wave pair = roots minimizing |s -/+ i sqrt(lam)|, ties broken by smaller |Re s|.
BranchSplit classify_branches(const std::array<cplx, 5>& roots, double lambda);

/// Three-term high-frequency expansion of the wave root near sigma i sqrt(lam):
///   sigma i sqrt(lam) - alpha^2/(2(b-tau) lam^2) - sigma i alpha^2 tau/(2(b-tau) lam^{3/2}).
/// Requires b > tau.
cplx asymptotic_prediction(double lambda, const ModelParams& params, int sigma);
/// Same expansion with b - tau written as tau (c_mgt^2 - c_w^2), c_w = 1,
/// c_mgt = sqrt(b/tau).
cplx asymptotic_prediction_speed_gap(double lambda, const ModelParams& params, int sigma);
/// Offset of the prediction from sigma i sqrt(lam) (no cancellation).
cplx asymptotic_offset(double lambda, const ModelParams& params, int sigma);

struct ModalRecord {
  double lambda = 0.0;
  std::array<cplx, 5> roots{};
  std::array<cplx, 2> wave_pair{};
  /// wave_pair[j] - sigma_j i sqrt(lam), computed directly (sigma = +1, -1).
  std::array<cplx, 2> wave_offset{};
  std::array<cplx, 3> mgt_roots{};
  std::array<cplx, 2> predicted_offset{};
  double max_residual = 0.0;  ///< relative to scale_at(root)
  double conjugate_gap = 0.0;  ///< distance of the root set from its conjugate
  bool flagged = false;
  std::string flag_reason;

  /// Re of the upper wave root.
  [[nodiscard]] double wave_real() const { return wave_offset[0].real(); }
  /// |Im s_wave| - sqrt(lam).
  [[nodiscard]] double wave_imag_defect() const { return wave_offset[0].imag(); }
};

ModalRecord modal_record(double lambda, const ModelParams& params);

struct PowerFit {
  double exponent = 0.0;
  double prefactor = 0.0;  ///< |y| ~ prefactor * lam^exponent
  int points = 0;
};

/// Least-squares slope of log|y| against log lam.
PowerFit fit_power_law(const std::vector<double>& lambdas, const std::vector<double>& values);

struct SweepResult {
  std::vector<ModalRecord> records;
  PowerFit real_fit;   ///< |Re s_wave| over the top decade
  PowerFit imag_fit;   ///< ||Im s_wave| - sqrt(lam)| over the top decade
  /// mean of |Re s_wave| lam^2 over the top decade (compare alpha^2/(2(b-tau)))
  double real_prefactor = 0.0;
  double imag_prefactor = 0.0;  ///< mean of |defect| lam^{3/2}
  double max_residual = 0.0;
  int flagged = 0;
  bool all_stable = true;  ///< every root observed with Re s < 0
  bool near_resonance = false;  ///< b close to tau; expansion not uniform
};

/// 10^a, ..., 10^b with `per_decade` points per decade.
std::vector<double> geometric_grid(double lo, double hi, int per_decade);

/// Records for every lambda in [1, 1e8]; fits use the top decade of the
/// range, flagged records excluded.
SweepResult sweep(const std::vector<double>& lambdas, const ModelParams& params);

/// Threshold on (b - tau)/tau below which sweeps are marked near-resonant.
inline constexpr double kResonanceWarning = 0.05;

}  // namespace wavemgt
