#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wavemgt/model_params.hpp"
#include "wavemgt/nonlinearity.hpp"
#include "wavemgt/spectral_basis.hpp"

namespace wavemgt {

/// Q_alpha = |grad u|^2 + |grad w|^2 + 2 alpha (u, w)
/// I_alpha = Q_alpha - int |u|^g ln|u|
/// J_alpha = Q_alpha / 2 - (1/g) int |u|^g ln|u| + (1/g^2) ||u||_g^g
struct WellFunctionals {
  double Q = 0.0;
  double I = 0.0;
  double J = 0.0;
  double lgamma_term = 0.0;  ///< int |u|^g ln|u|
  double gamma_norm = 0.0;   ///< ||u||_g^g
};

WellFunctionals functionals(const SpectralField& u, const SpectralField& w,
                            const ModelParams& params, const Basis& basis);

/// Q_alpha alone (no quadrature).
double quadratic_form(const SpectralField& u, const SpectralField& w, const ModelParams& params,
                      const Basis& basis);

// ---------------------------------------------------------------------------
// Nehari ray
// ---------------------------------------------------------------------------

/// Restriction of I_alpha to the ray lambda * (phi, psi):
///   I(lambda) = lambda^2 Q - lambda^g (A ln lambda + B),
/// A = ||phi||_g^g, B = int |phi|^g ln|phi|, Q = Q_alpha(phi, psi).
struct RayProfile {
  double Q = 0.0;
  double A = 0.0;
  double B = 0.0;
  double gamma = 0.0;

  [[nodiscard]] double nehari(double scale) const;
  /// J_alpha(scale * (phi, psi)).
  [[nodiscard]] double energy(double scale) const;
};

RayProfile ray_profile(const SpectralField& phi, const SpectralField& psi,
                       const ModelParams& params, const Basis& basis);

inline constexpr double kRayMin = 1e-6;
inline constexpr double kRayMax = 1e6;

/// The scale lambda* > 0 at which the ray meets the Nehari manifold (first
/// +/- sign change of I, relative tolerance 1e-12), or nullopt when no sign
/// change occurs in (1e-6, 1e6). Requires phi != 0.
std::optional<double> ray_scale_root(const SpectralField& phi, const SpectralField& psi,
                                     const ModelParams& params, const Basis& basis);
std::optional<double> ray_scale_root(const RayProfile& ray);

/// Every sign change of I along the ray found by a dense log-spaced scan of
/// (1e-6, 1e6), each refined by bisection. Diagnostic counterpart of
/// ray_scale_root.
struct RayCrossing {
  double scale;
  bool downward;  ///< + to -
};
std::vector<RayCrossing> ray_crossings(const RayProfile& ray, std::size_t scan_points = 4000);

// ---------------------------------------------------------------------------
// well depth
// ---------------------------------------------------------------------------

struct SearchConfig {
  int modes = 8;       ///< K, directions live in span{e_1..e_K} x span{e_1..e_K}
  int restarts = 50;
  std::uint64_t seed = 1;
  bool phi_only = false;  ///< restrict to (phi, 0) directions
  int max_evals = 3000;   ///< per local search
};

struct Witness {
  SpectralField phi;  ///< direction, normalized so Q_alpha(phi, psi) = 1
  SpectralField psi;
  double scale = 0.0;  ///< lambda*
  double J = 0.0;      ///< J_alpha on the Nehari point
};

struct WellDepthEstimate {
  double upper = 0.0;  ///< best J on located Nehari points (>= d_alpha)
  double lower = 0.0;  ///< constructive bound from the absorption constants (<= d_alpha)
  double rho0 = 0.0;   ///< local positivity radius
  std::vector<Witness> witnesses;  ///< one local minimum per restart, best first
  int discarded = 0;   ///< trial directions with no Nehari crossing
  int evaluations = 0;

  [[nodiscard]] bool consistent() const { return lower > 0.0 && upper > 0.0 && lower <= upper; }
};

/// Multistart Nelder-Mead over unit directions of a K-mode truncation of the
/// ray-projected objective J(lambda*(phi, psi) (phi, psi)). Deterministic for
/// a fixed seed. A warm start (2K coefficients, phi then psi) is used as the
/// first restart's initial point.
WellDepthEstimate well_depth_upper(const ModelParams& params, const Basis& basis,
                                   const SearchConfig& search,
                                   const std::optional<Eigen::VectorXd>& warm_start = {});

/// Searches over the nested truncations K_1 < K_2 < ..., warm-starting each
/// level from the previous best witness so that upper is nonincreasing in K.
struct LadderLevel {
  int modes = 0;
  WellDepthEstimate estimate;
};
std::vector<LadderLevel> well_depth_ladder(const ModelParams& params, const Basis& basis,
                                           const SearchConfig& search,
                                           const std::vector<int>& modes);

/// ((g-2)/(2g)) c0, c0 = (1/(2 C~))^{2/(g+eta-2)}, C~ = C_S C_eps c_alpha^{-(g+eta)/2}.
/// Requires eps / (lambda_1 c_alpha) <= 1/2.
double well_depth_lower(const AbsorptionConstants& consts, const ModelParams& params);

/// Largest rho0 with C~ rho0^{(g+eta)/2 - 1} <= 1/2.
/// Requires eps / (lambda_1 c_alpha) <= 1/4.
double local_positivity_radius(const AbsorptionConstants& consts, const ModelParams& params);

/// C_S for int |u|^p <= C_S |grad u|^p on H^1_0(0, L), from
/// |u|_inf^2 <= (L/4)|u'|^2 and Poincare: C_S = (L/4)^{(p-2)/2} / lambda_1.
double sobolev_constant_bound(const DomainSpec& domain, double p);

/// Largest ratio int |u|^p / |grad u|^p found by multistart search over
/// fields of the first `modes` modes. A lower estimate of the true constant.
double estimate_sobolev_constant(const Basis& basis, double p, int modes = 8, int restarts = 20,
                                 std::uint64_t seed = 1);

struct WellConstants {
  AbsorptionConstants consts;
  AbsorptionCalibration calibration;
  double sobolev_numeric = 0.0;
};

/// eps defaults to lambda_1 c_alpha / 4, which satisfies the smallness
/// conditions of both the depth bound and the positivity radius.
WellConstants calibrate_constants(const ModelParams& params, const Basis& basis, double eta,
                                  std::optional<double> eps = {});

// ---------------------------------------------------------------------------
// membership
// ---------------------------------------------------------------------------

enum class Membership { StableInterior, Origin, NehariBoundary, Outside };

std::string to_string(Membership m);

struct Classification {
  Membership label = Membership::Outside;
  WellFunctionals values;
  bool energy_below_depth = false;
  /// Always true: membership is decided against the upper estimate d_hat,
  /// not the exact d_alpha.
  bool relative_to_estimate = true;
};

inline constexpr double kNehariTol = 1e-9;

Classification classify(const SpectralField& u, const SpectralField& w, double energy_now,
                        const WellDepthEstimate& est, const ModelParams& params,
                        const Basis& basis);

}  // namespace wavemgt
