#pragma once

#include <string>
#include <variant>
#include <vector>

#include "wavemgt/spectral_basis.hpp"

namespace wavemgt::experiments {

/// An initial-data field: either an expression built from the named
/// profiles, joined by '+',
///   mode(k, amp)               amp * e_k
///   gauss(center, width, amp)  amp * exp(-((x-center)/width)^2), projected
///   zero
/// or an explicit coefficient list (length <= n_modes, zero padded).
struct ProfileSpec {
  std::variant<std::string, std::vector<double>> source = std::string("zero");

  [[nodiscard]] bool is_expression() const { return std::holds_alternative<std::string>(source); }
};

/// Throws ValidationError naming the offending term.
SpectralField evaluate_profile(const ProfileSpec& spec, const Basis& basis);

/// Parses without evaluating; used during config validation.
void check_profile(const ProfileSpec& spec, int n_modes);

}  // namespace wavemgt::experiments
