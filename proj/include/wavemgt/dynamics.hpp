#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "wavemgt/error.hpp"
#include "wavemgt/model_params.hpp"
#include "wavemgt/spectral_basis.hpp"

namespace wavemgt {

/// Phase-space point (u, u_t, w, w_t, v_t) with w = v + tau v_t.
/// v itself is recoverable as w - tau * q and is never needed to advance.
struct SystemState {
  SpectralField u;  ///< wave displacement
  SpectralField p;  ///< u_t
  SpectralField w;  ///< v + tau v_t
  SpectralField m;  ///< w_t
  SpectralField q;  ///< v_t
  double t = 0.0;

  static SystemState zero(int n);
  [[nodiscard]] bool all_finite() const;
};

/// Time derivative of every component of a SystemState.
struct StateRate {
  SpectralField du, dp, dw, dm, dq;
};

/// Initial data of the original (u, v) formulation.
struct InitialData {
  SpectralField u0, u1, v0, v1, v2;

  static InitialData zero(int n);
};

/// Summands of
///   E = 1/2|u_t|^2 + 1/2|w_t|^2 + tau(b-tau)/2 |grad v_t|^2
///       + 1/2|grad u|^2 + 1/2|grad w|^2 + alpha(u,w) - int F(u)
/// and the running dissipation (b - tau) int_0^t |grad v_t|^2.
struct EnergyBreakdown {
  double kin_u = 0.0;
  double kin_w = 0.0;
  double kin_vt = 0.0;
  double pot_u = 0.0;
  double pot_w = 0.0;
  double coupling = 0.0;
  double potentialF = 0.0;
  double total = 0.0;
  double dissipated = 0.0;

  /// Recompute total from the summands.
  [[nodiscard]] double sum() const {
    return kin_u + kin_w + kin_vt + pot_u + pot_w + coupling - potentialF;
  }
};

/// w0 = v0 + tau v1, w1 = v1 + tau v2, q = v1.
SystemState initial_state(const InitialData& data, const ModelParams& params);

/// u' = p, p' = Lap u - alpha w + P f(u), w' = m,
/// m' = Lap w + (b - tau) Lap q - alpha u, q' = (m - q) / tau.
StateRate rhs(const SystemState& state, const ModelParams& params, const Basis& basis);

/// Largest admissible step: 1 / sqrt(lambda_N max(1, b/tau)).
double stability_ceiling(const ModelParams& params, const Basis& basis);

/// Integration produced a non-finite coefficient. Carries the time of failure
/// and everything recorded up to the last finite snapshot.
class BlowupError : public NumericalError {
 public:
  BlowupError(double time, std::string what);
  [[nodiscard]] double time() const { return time_; }

 private:
  double time_;
};

/// One classical fourth-order Runge-Kutta step. Throws BlowupError when the
/// result is not finite and ValidationError when dt exceeds the ceiling.
SystemState step_rk4(const SystemState& state, double dt, const ModelParams& params,
                     const Basis& basis);

EnergyBreakdown energy(const SystemState& state, const ModelParams& params, const Basis& basis);

struct Snapshot {
  SystemState state;
  EnergyBreakdown energy;
};

struct IntegrateOptions {
  double T = 1.0;
  double dt = 1e-3;
  /// Record every snapshot_stride accepted steps (the final time is always recorded).
  int snapshot_stride = 1;
  /// Called with each recorded snapshot; must not retain references.
  std::function<void(const Snapshot&)> observer;
};

struct Trajectory {
  std::vector<Snapshot> records;
  bool completed = false;
  std::optional<double> blowup_time;
  std::string failure;
};

/// Fixed-step RK4 over [0, T]. The dissipation integral is accumulated by
/// composite Simpson on |grad q|^2 at accepted steps (fourth order).
/// Blowup does not throw: the trajectory is returned with completed = false,
/// blowup_time set and the finite records kept. Use integrate_or_throw for
/// the throwing variant.
Trajectory integrate(const InitialData& data, const IntegrateOptions& opts,
                     const ModelParams& params, const Basis& basis);
Trajectory integrate_from(const SystemState& start, const IntegrateOptions& opts,
                          const ModelParams& params, const Basis& basis);

/// As integrate, but raises BlowupError; partial records are available
/// through the observer.
Trajectory integrate_or_throw(const InitialData& data, const IntegrateOptions& opts,
                              const ModelParams& params, const Basis& basis);

/// r(t) = E(t) + dissipated(t) - E(0).
std::vector<double> energy_residual(const std::vector<Snapshot>& records);

// ---------------------------------------------------------------------------
// stable-set monitor
// ---------------------------------------------------------------------------

struct MonitorRow {
  double t = 0.0;
  double Q = 0.0;
  double I = 0.0;
  double J = 0.0;
  bool origin = false;  ///< (u, w) = (0, 0)
  bool in_well = false;  ///< origin, or I > 0 and J < d_hat
  /// |u_t|^2 + |w_t|^2 + |grad v_t|^2 + |grad u|^2 + |grad w|^2 + ||u||_gamma^gamma
  double uniform_quantity = 0.0;
};

struct MonitorReport {
  double depth_estimate = 0.0;
  std::vector<MonitorRow> rows;
  std::optional<double> first_nonpositive_I;
  std::optional<double> first_J_above_depth;
  /// E(0) / min(1/2, tau(b-tau)/2, (gamma-2) c_alpha/(2 gamma), 1/gamma^2);
  /// bounds the uniform quantity whenever the pair stays in the well.
  double uniform_bound = 0.0;
  double uniform_max = 0.0;
  bool initially_in_well = false;

  [[nodiscard]] bool invariant_held() const {
    return !first_nonpositive_I && !first_J_above_depth;
  }
  [[nodiscard]] bool uniform_bound_held() const { return uniform_max <= uniform_bound; }
};

/// Q, I, J per snapshot against the well-depth estimate d_hat (an upper
/// estimate of d_alpha; membership is certified only relative to it).
MonitorReport well_monitor(const std::vector<Snapshot>& records, double depth_estimate,
                           const ModelParams& params, const Basis& basis);

/// Constant of the a priori bound, derived from the initial energy.
double uniform_bound_constant(double initial_energy, const ModelParams& params);

}  // namespace wavemgt
