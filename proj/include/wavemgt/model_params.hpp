#pragma once

#include <optional>

#include "wavemgt/nonlinearity.hpp"
#include "wavemgt/spectral_basis.hpp"

namespace wavemgt {

/// Physical and coupling constants of the wave-MGT system plus the domain.
///
///   u_tt - Lap u + alpha (v + tau v_t) = f(u)
///   tau v_ttt + v_tt - Lap v - b Lap v_t + alpha u = 0
///
/// Admissible set: b > tau > 0, |alpha| < lambda_1, gamma > 2 (and the
/// subcritical bound when a dimension n >= 3 is declared).
struct ModelParams {
  double tau = 1.0;
  double b = 2.0;
  double alpha = 0.5;
  double gamma = 2.5;
  std::optional<int> dimension;
  DomainSpec domain;
  /// Zeroes the source term; used by the linear closed-form checks.
  bool source_enabled = true;

  void validate() const;

  [[nodiscard]] double lambda1() const;
  /// b - tau, the effective MGT damping.
  [[nodiscard]] double damping() const { return b - tau; }
  /// c_alpha = 1 - |alpha| / lambda_1 (coercivity constant of Q_alpha).
  [[nodiscard]] double coercivity() const;
  [[nodiscard]] LogSource source() const { return LogSource{gamma, dimension}; }
};

}  // namespace wavemgt
