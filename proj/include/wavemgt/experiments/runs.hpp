#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavemgt/dynamics.hpp"
#include "wavemgt/experiments/config.hpp"
#include "wavemgt/modal_spectrum.hpp"
#include "wavemgt/potential_well.hpp"

namespace wavemgt::experiments {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitAcceptance = 4;

struct RunContext {
  int jobs = 1;
};

/// Status shared by every experiment: `passed` drives exit code 4,
/// `numerical_failure` (blowup) drives exit code 3.
struct Verdict {
  bool passed = true;
  bool numerical_failure = false;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what);
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Runs fn(0..n-1) on up to `jobs` threads; results in index order.
template <class R, class F>
std::vector<R> parallel_map(int n, int jobs, F&& fn);

// ---------------------------------------------------------------------------
// simulate

/// Per-step tolerance of the energy monotonicity check.
inline constexpr double kMonotoneTol = 1e-9;

struct SimulateResult {
  Trajectory trajectory;
  std::vector<double> residual;
  MonitorReport monitor;
  double depth_estimate = 0.0;
  bool energy_monotone = true;
  Verdict verdict;
};

SimulateResult simulate(const RunConfig& cfg);
/// Upper well-depth estimate from the config's search ladder.
WellDepthEstimate depth_estimate(const RunConfig& cfg, const Basis& basis);

// ---------------------------------------------------------------------------
// energy audit

struct AuditLevel {
  double dt = 0.0;
  double max_residual = 0.0;
  double dissipated = 0.0;  ///< at T
  bool completed = false;
};

/// Residuals at or below this are treated as integrator roundoff.
inline constexpr double kResidualFloor = 1e-10;

struct AuditResult {
  std::vector<AuditLevel> levels;
  double order = 0.0;  ///< least-squares slope of log r against log dt
  bool at_floor = false;  ///< every level at or below kResidualFloor
  bool v_data_nonzero = false;
  Verdict verdict;
};

AuditResult energy_audit(const RunConfig& cfg, const RunContext& ctx = {});

// ---------------------------------------------------------------------------
// spectrum

inline constexpr double kExponentTol = 0.05;
inline constexpr double kPrefactorTol = 0.02;
inline constexpr double kRootResidualTol = 1e-6;
inline constexpr double kFactorizationTol = 1e-9;

struct SpectrumResult {
  SweepResult sweep;
  double predicted_prefactor = 0.0;  ///< alpha^2 / (2 (b - tau))
  double predicted_imag_prefactor = 0.0;  ///< alpha^2 tau / (2 (b - tau))
  double factorization_error = 0.0;  ///< alpha = 0 roots vs {+-i sqrt(lam)} u cubic roots
  Verdict verdict;
};

SpectrumResult spectrum(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// well depth

struct RhoTest {
  int samples = 0;
  int inside_violations = 0;
  bool outside_violation_found = false;
  double outside_Q = 0.0;
  double outside_ratio = 0.0;  ///< I / Q at the violating point
};

struct WellDepthResult {
  std::vector<LadderLevel> ladder;
  WellConstants constants;
  double upper = 0.0;
  double lower = 0.0;
  double rho0 = 0.0;
  bool k_monotone = true;
  RhoTest rho;
  Verdict verdict;
};

/// Tolerance of the K-monotonicity check.
inline constexpr double kMonotoneKTol = 1e-6;

WellDepthResult well_depth(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// decay study

struct DecayRun {
  std::string label;
  double E0 = 0.0;
  double ET = 0.0;
  double u_energy0 = 0.0;  ///< kin_u + pot_u - potentialF
  double u_energyT = 0.0;
  std::vector<double> window_rates;  ///< -ln(E_end/E_start)/window
  std::vector<double> t, E, u_energy;
  bool completed = false;

  [[nodiscard]] double ratio() const { return ET / E0; }
};

/// Relative drift of the u-subsystem energy allowed in the alpha = 0 control.
inline constexpr double kControlDrift = 1e-6;

struct DecayResult {
  DecayRun base;     ///< config data
  DecayRun low;      ///< mode 1, same E(0)
  DecayRun high;     ///< mode k, same E(0)
  std::optional<DecayRun> control;  ///< alpha = 0, config data
  double depth_estimate = 0.0;
  Verdict verdict;
};

DecayResult decay_study(const RunConfig& cfg, const RunContext& ctx = {});

// ---------------------------------------------------------------------------
// continuous dependence

struct DependenceRun {
  double delta = 0.0;
  double Z0 = 0.0;
  double C = 0.0;  ///< sup_t ln(Z(t)/Z(0)) / t
  double envelope_excess = 0.0;  ///< max_t Z(t) / (Z(0) e^{C t}) - 1
  bool equivalence_held = true;
  std::vector<double> t, Z;
  bool completed = false;
};

struct DependenceResult {
  std::vector<DependenceRun> runs;
  double c_spread = 0.0;  ///< max relative deviation of C across deltas
  Verdict verdict;
};

DependenceResult continuous_dependence(const RunConfig& cfg, const RunContext& ctx = {});

/// Difference energy of two states:
/// 1/2|z_t|^2 + 1/2|y_t|^2 + tau(b-tau)/2 |grad r_t|^2 + 1/2|grad z|^2 + 1/2|grad y|^2 + alpha (z, y).
double difference_energy(const SystemState& a, const SystemState& b, const ModelParams& params,
                         const Basis& basis);
/// |z_t|^2 + |y_t|^2 + |grad r_t|^2 + |grad z|^2 + |grad y|^2.
double difference_norm_sq(const SystemState& a, const SystemState& b, const Basis& basis);

// ---------------------------------------------------------------------------
// cross validation

struct CrossLevel {
  int fd_nodes = 0;
  double dt = 0.0;
  double discrepancy = 0.0;  ///< max over snapshots of the L2 gap of (u, w)
  std::vector<double> t, gap;
  std::optional<double> spectral_exact_error;  ///< linear configs only
  std::optional<double> fd_exact_error;
  bool completed = false;
};

/// Accepted window of the observed refinement order.
inline constexpr double kCrossOrderLo = 1.7;
inline constexpr double kCrossOrderHi = 2.3;

struct CrossResult {
  CrossLevel base;
  std::optional<CrossLevel> refined;
  std::optional<double> observed_order;
  double tolerance = 0.0;
  Verdict verdict;
};

CrossResult cross_validate(const RunConfig& cfg, const RunContext& ctx = {});

// ---------------------------------------------------------------------------

/// Runs one experiment, writing its outputs and manifest under
/// cfg.output_dir. Returns the process exit code. ValidationError and
/// NumericalError propagate to the caller.
int run_experiment(ExperimentKind kind, const RunConfig& cfg, const RunContext& ctx = {});

}  // namespace wavemgt::experiments

#include "wavemgt/experiments/parallel.ipp"
