#include "wavemgt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wavemgt/nonlinearity.hpp"
#include "wavemgt/potential_well.hpp"

namespace wavemgt {

SystemState SystemState::zero(int n) {
  const SpectralField z = SpectralField::zero(n);
  return SystemState{z, z, z, z, z, 0.0};
}

bool SystemState::all_finite() const {
  return u.coeffs.allFinite() && p.coeffs.allFinite() && w.coeffs.allFinite() &&
         m.coeffs.allFinite() && q.coeffs.allFinite() && std::isfinite(t);
}

InitialData InitialData::zero(int n) {
  const SpectralField z = SpectralField::zero(n);
  return InitialData{z, z, z, z, z};
}

BlowupError::BlowupError(double time, std::string what)
    : NumericalError(std::move(what)), time_(time) {}

SystemState initial_state(const InitialData& data, const ModelParams& params) {
  const int n = data.u0.size();
  for (const SpectralField* f : {&data.u1, &data.v0, &data.v1, &data.v2}) {
    if (f->size() != n) throw ValidationError("initial data fields do not share one basis");
  }
  SystemState s;
  s.u = data.u0;
  s.p = data.u1;
  s.w = data.v0 + params.tau * data.v1;
  s.m = data.v1 + params.tau * data.v2;
  s.q = data.v1;
  s.t = 0.0;
  return s;
}

StateRate rhs(const SystemState& state, const ModelParams& params, const Basis& basis) {
  const Eigen::VectorXd& lam = basis.eigenvalues();
  const double alpha = params.alpha;

  StateRate r;
  r.du = state.p;
  r.dp = SpectralField(-lam.cwiseProduct(state.u.coeffs) - alpha * state.w.coeffs);
  if (params.source_enabled) r.dp += apply_f(state.u, params.source(), basis);
  r.dw = state.m;
  r.dm = SpectralField(-lam.cwiseProduct(state.w.coeffs + params.damping() * state.q.coeffs) -
                       alpha * state.u.coeffs);
  r.dq = SpectralField((state.m.coeffs - state.q.coeffs) / params.tau);
  return r;
}

double stability_ceiling(const ModelParams& params, const Basis& basis) {
  const double lam_n = basis.eigenvalues()[basis.size() - 1];
  return 1.0 / std::sqrt(lam_n * std::max(1.0, params.b / params.tau));
}

namespace {

SystemState advance(const SystemState& s, const StateRate& r, double h) {
  SystemState out;
  out.u = SpectralField(s.u.coeffs + h * r.du.coeffs);
  out.p = SpectralField(s.p.coeffs + h * r.dp.coeffs);
  out.w = SpectralField(s.w.coeffs + h * r.dw.coeffs);
  out.m = SpectralField(s.m.coeffs + h * r.dm.coeffs);
  out.q = SpectralField(s.q.coeffs + h * r.dq.coeffs);
  out.t = s.t + h;
  return out;
}

SystemState rk4_unchecked(const SystemState& s, double dt, const ModelParams& params,
                          const Basis& basis) {
  const StateRate k1 = rhs(s, params, basis);
  const StateRate k2 = rhs(advance(s, k1, 0.5 * dt), params, basis);
  const StateRate k3 = rhs(advance(s, k2, 0.5 * dt), params, basis);
  const StateRate k4 = rhs(advance(s, k3, dt), params, basis);

  const double c = dt / 6.0;
  SystemState out;
  out.u = SpectralField(s.u.coeffs +
                        c * (k1.du.coeffs + 2.0 * (k2.du.coeffs + k3.du.coeffs) + k4.du.coeffs));
  out.p = SpectralField(s.p.coeffs +
                        c * (k1.dp.coeffs + 2.0 * (k2.dp.coeffs + k3.dp.coeffs) + k4.dp.coeffs));
  out.w = SpectralField(s.w.coeffs +
                        c * (k1.dw.coeffs + 2.0 * (k2.dw.coeffs + k3.dw.coeffs) + k4.dw.coeffs));
  out.m = SpectralField(s.m.coeffs +
                        c * (k1.dm.coeffs + 2.0 * (k2.dm.coeffs + k3.dm.coeffs) + k4.dm.coeffs));
  out.q = SpectralField(s.q.coeffs +
                        c * (k1.dq.coeffs + 2.0 * (k2.dq.coeffs + k3.dq.coeffs) + k4.dq.coeffs));
  out.t = s.t + dt;
  return out;
}

void check_step(double dt, const ModelParams& params, const Basis& basis) {
  if (!(dt > 0.0)) {
    std::ostringstream msg;
    msg << "dt > 0 violated: " << dt;
    throw ValidationError(msg.str());
  }
  const double ceiling = stability_ceiling(params, basis);
  if (dt > ceiling * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt <= 1/sqrt(lambda_N max(1, b/tau)) violated: " << dt << " > " << ceiling;
    throw ValidationError(msg.str());
  }
}

double dissipation_rate(const SystemState& s, const ModelParams& params, const Basis& basis) {
  return params.damping() * grad_norm_sq(s.q, basis);
}

}  // namespace

SystemState step_rk4(const SystemState& state, double dt, const ModelParams& params,
                     const Basis& basis) {
  check_step(dt, params, basis);
  SystemState out = rk4_unchecked(state, dt, params, basis);
  if (!out.all_finite()) {
    std::ostringstream msg;
    msg << "non-finite state at t = " << out.t;
    throw BlowupError(out.t, msg.str());
  }
  return out;
}

EnergyBreakdown energy(const SystemState& s, const ModelParams& params, const Basis& basis) {
  EnergyBreakdown e;
  e.kin_u = 0.5 * l2_norm_sq(s.p);
  e.kin_w = 0.5 * l2_norm_sq(s.m);
  e.kin_vt = 0.5 * params.tau * params.damping() * grad_norm_sq(s.q, basis);
  e.pot_u = 0.5 * grad_norm_sq(s.u, basis);
  e.pot_w = 0.5 * grad_norm_sq(s.w, basis);
  e.coupling = params.alpha * l2_inner(s.u, s.w);
  e.potentialF = params.source_enabled ? potential_integral(s.u, params.source(), basis) : 0.0;
  e.total = e.sum();
  return e;
}

Trajectory integrate_from(const SystemState& start, const IntegrateOptions& opts,
                          const ModelParams& params, const Basis& basis) {
  params.validate();
  basis.check(start.u);
  if (!(opts.T > 0.0)) {
    std::ostringstream msg;
    msg << "T > 0 violated: " << opts.T;
    throw ValidationError(msg.str());
  }
  if (opts.snapshot_stride < 1) throw ValidationError("snapshot_stride >= 1 violated");

  const long steps = std::max(1L, static_cast<long>(std::ceil(opts.T / opts.dt - 1e-9)));
  const double dt = opts.T / static_cast<double>(steps);
  check_step(dt, params, basis);

  Trajectory traj;
  auto emit = [&](const SystemState& s, double dissipated) {
    Snapshot snap{s, energy(s, params, basis)};
    snap.energy.dissipated = dissipated;
    if (opts.observer) opts.observer(snap);
    traj.records.push_back(std::move(snap));
  };

  SystemState state = start;
  const double t0 = start.t;
  emit(state, 0.0);

  // Composite Simpson over completed pairs of steps; an odd trailing step
  // uses the three-point end formula h/12 (-g0 + 8 g1 + 5 g2). The very
  // first step has no left neighbour and is closed with a half-step sample.
  double g_prev2 = 0.0;
  double g_prev = dissipation_rate(state, params, basis);
  double simpson_even = 0.0;
  double g_half_first = 0.0;
  double current_dissipated = 0.0;
  {
    const SystemState half = rk4_unchecked(state, 0.5 * dt, params, basis);
    g_half_first = dissipation_rate(half, params, basis);
  }

  for (long n = 1; n <= steps; ++n) {
    SystemState next = rk4_unchecked(state, dt, params, basis);
    next.t = t0 + dt * static_cast<double>(n);
    if (!next.all_finite()) {
      traj.blowup_time = next.t;
      std::ostringstream msg;
      msg << "non-finite state at t = " << next.t << " (last finite t = " << state.t << ")";
      traj.failure = msg.str();
      if (traj.records.back().state.t != state.t) emit(state, current_dissipated);
      return traj;
    }
    const double g = dissipation_rate(next, params, basis);
    double dissipated = 0.0;
    if (n == 1) {
      dissipated = dt / 6.0 * (g_prev + 4.0 * g_half_first + g);
    } else if (n % 2 == 0) {
      simpson_even += dt / 3.0 * (g_prev2 + 4.0 * g_prev + g);
      dissipated = simpson_even;
    } else {
      dissipated = simpson_even + dt / 12.0 * (-g_prev2 + 8.0 * g_prev + 5.0 * g);
    }
    g_prev2 = g_prev;
    g_prev = g;
    current_dissipated = dissipated;
    state = std::move(next);
    if (n % opts.snapshot_stride == 0 || n == steps) emit(state, dissipated);
  }
  traj.completed = true;
  return traj;
}

Trajectory integrate(const InitialData& data, const IntegrateOptions& opts,
                     const ModelParams& params, const Basis& basis) {
  return integrate_from(initial_state(data, params), opts, params, basis);
}

Trajectory integrate_or_throw(const InitialData& data, const IntegrateOptions& opts,
                              const ModelParams& params, const Basis& basis) {
  Trajectory traj = integrate(data, opts, params, basis);
  if (!traj.completed) throw BlowupError(*traj.blowup_time, traj.failure);
  return traj;
}

std::vector<double> energy_residual(const std::vector<Snapshot>& records) {
  std::vector<double> r;
  if (records.empty()) return r;
  const double e0 = records.front().energy.total;
  r.reserve(records.size());
  for (const auto& snap : records) r.push_back(snap.energy.total + snap.energy.dissipated - e0);
  return r;
}

double uniform_bound_constant(double initial_energy, const ModelParams& params) {
  const double g = params.gamma;
  const double m = std::min({0.5, 0.5 * params.tau * params.damping(),
                             (g - 2.0) * params.coercivity() / (2.0 * g), 1.0 / (g * g)});
  return initial_energy / m;
}

MonitorReport well_monitor(const std::vector<Snapshot>& records, double depth_estimate,
                           const ModelParams& params, const Basis& basis) {
  MonitorReport rep;
  rep.depth_estimate = depth_estimate;
  if (records.empty()) return rep;
  rep.uniform_bound = uniform_bound_constant(records.front().energy.total, params);

  for (const auto& snap : records) {
    const SystemState& s = snap.state;
    const WellFunctionals fn = functionals(s.u, s.w, params, basis);
    MonitorRow row;
    row.t = s.t;
    row.Q = fn.Q;
    row.I = fn.I;
    row.J = fn.J;
    row.origin = s.u.is_zero() && s.w.is_zero();
    row.in_well = row.origin || (fn.I > 0.0 && fn.J < depth_estimate);
    row.uniform_quantity = l2_norm_sq(s.p) + l2_norm_sq(s.m) + grad_norm_sq(s.q, basis) +
                           grad_norm_sq(s.u, basis) + grad_norm_sq(s.w, basis) + fn.gamma_norm;
    rep.uniform_max = std::max(rep.uniform_max, row.uniform_quantity);
    if (!row.origin) {
      if (!rep.first_nonpositive_I && fn.I <= 0.0) rep.first_nonpositive_I = row.t;
      if (!rep.first_J_above_depth && fn.J >= depth_estimate) rep.first_J_above_depth = row.t;
    }
    rep.rows.push_back(row);
  }
  rep.initially_in_well = rep.rows.front().in_well;
  return rep;
}

}  // namespace wavemgt
