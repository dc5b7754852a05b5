#include "wavemgt/experiments/runs.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>
#include <unsupported/Eigen/Polynomials>

#include "wavemgt/error.hpp"
#include "wavemgt/experiments/fd_solver.hpp"
#include "wavemgt/experiments/logging.hpp"
#include "wavemgt/experiments/output.hpp"
#include "wavemgt/experiments/svg_plot.hpp"

namespace wavemgt::experiments {

using nlohmann::json;

void Verdict::require(bool ok, const std::string& what) {
  if (ok) return;
  passed = false;
  failures.push_back(what);
}

json Verdict::to_json() const {
  return {{"passed", passed}, {"numerical_failure", numerical_failure}, {"failures", failures}};
}

namespace {

std::string fmt(double v) { return format_double(v); }

// JSON has no inf/nan; emit null for them.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json coeffs_json(const SpectralField& f) {
  return std::vector<double>(f.coeffs.data(), f.coeffs.data() + f.coeffs.size());
}

Basis make_basis(const RunConfig& cfg) {
  cfg.validate();
  return build_basis(cfg.params.domain);
}

bool v_data_nonzero(const InitialData& d) {
  return !(d.v0.is_zero() && d.v1.is_zero() && d.v2.is_zero());
}

double u_energy(const EnergyBreakdown& e) { return e.kin_u + e.pot_u - e.potentialF; }

// Least-squares slope of ln y against ln x.
double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SearchConfig search_config(const RunConfig& cfg) {
  SearchConfig s;
  s.restarts = cfg.well_depth.restarts;
  s.seed = cfg.seed;
  s.phi_only = cfg.well_depth.phi_only;
  s.max_evals = cfg.well_depth.max_evals;
  return s;
}

SpectralField random_field(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  SpectralField f = SpectralField::zero(n);
  for (int k = 0; k < n; ++k) f.coeffs[k] = normal(rng) / (1.0 + k);
  return f;
}

}  // namespace

// ===========================================================================
// simulate

WellDepthEstimate depth_estimate(const RunConfig& cfg, const Basis& basis) {
  const auto ladder = well_depth_ladder(cfg.params, basis, search_config(cfg), cfg.well_depth.modes);
  return ladder.back().estimate;
}

SimulateResult simulate(const RunConfig& cfg) {
  const Basis basis = make_basis(cfg);
  SimulateResult r;
  const InitialData data = initial_data(cfg, basis);
  r.depth_estimate = depth_estimate(cfg, basis).upper;
  IntegrateOptions opt;
  opt.T = cfg.time.T;
  opt.dt = cfg.time.dt;
  opt.snapshot_stride = cfg.time.snapshot_stride;
  r.trajectory = integrate(data, opt, cfg.params, basis);
  r.residual = energy_residual(r.trajectory.records);
  r.monitor = well_monitor(r.trajectory.records, r.depth_estimate, cfg.params, basis);

  const auto& rec = r.trajectory.records;
  const double tol = kMonotoneTol * cfg.time.snapshot_stride;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    if (rec[i].energy.total > rec[i - 1].energy.total + tol) r.energy_monotone = false;
  }
  if (!r.trajectory.completed) {
    r.verdict.numerical_failure = true;
    r.verdict.require(false, "integration blew up: " + r.trajectory.failure);
  }
  r.verdict.require(r.energy_monotone, "E(t) increased between snapshots");
  if (r.monitor.initially_in_well) {
    r.verdict.require(r.monitor.invariant_held(), "stable-set data left the well");
    r.verdict.require(r.monitor.uniform_bound_held(), "uniform bound exceeded");
  }
  return r;
}

// ===========================================================================
// energy audit

AuditResult energy_audit(const RunConfig& cfg, const RunContext& ctx) {
  const Basis basis = make_basis(cfg);
  const InitialData data = initial_data(cfg, basis);
  AuditResult r;
  r.v_data_nonzero = v_data_nonzero(data);
  r.levels = parallel_map<AuditLevel>(cfg.audit.levels, ctx.jobs, [&](int i) {
    const int scale = 1 << i;
    IntegrateOptions opt;
    opt.T = cfg.time.T;
    opt.dt = cfg.time.dt / scale;
    // same sampled times at every level
    opt.snapshot_stride = cfg.time.snapshot_stride * scale;
    const Trajectory tr = integrate(data, opt, cfg.params, basis);
    AuditLevel lvl;
    lvl.dt = opt.dt;
    lvl.completed = tr.completed;
    for (double v : energy_residual(tr.records)) lvl.max_residual = std::max(lvl.max_residual, std::abs(v));
    lvl.dissipated = tr.records.back().energy.dissipated;
    return lvl;
  });

  std::vector<double> dts, res;
  r.at_floor = true;
  for (const auto& l : r.levels) {
    if (!l.completed) {
      r.verdict.numerical_failure = true;
      r.verdict.require(false, "integration blew up at dt = " + fmt(l.dt));
    }
    r.at_floor = r.at_floor && l.max_residual <= kResidualFloor;
    dts.push_back(l.dt);
    res.push_back(std::max(l.max_residual, std::numeric_limits<double>::min()));
    if (r.v_data_nonzero) {
      r.verdict.require(l.dissipated > 0.0, "dissipated(T) not positive at dt = " + fmt(l.dt));
    }
  }
  r.order = log_slope(dts, res);
  if (!r.at_floor) {
    r.verdict.require(r.order >= cfg.audit.min_order,
                      "residual order " + fmt(r.order) + " < " + fmt(cfg.audit.min_order));
  }
  return r;
}

// ===========================================================================
// spectrum

namespace {

// Relative Hausdorff distance between two root sets.
double root_set_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  auto one_way = [](const std::vector<cplx>& x, const std::vector<cplx>& y) {
    double worst = 0.0;
    for (const cplx& p : x) {
      double best = std::numeric_limits<double>::infinity();
      for (const cplx& q : y) best = std::min(best, std::abs(p - q) / std::max(1.0, std::abs(q)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

double factorization_error(double lambda, const ModelParams& params) {
  ModelParams p0 = params;
  p0.alpha = 0.0;
  const RootSet rs = poly_roots(char_poly(lambda, p0));
  // tau s^3 + s^2 + b lam s + lam, in z = s / sqrt(lam) for conditioning
  const double om = std::sqrt(lambda);
  Eigen::Vector4d c(1.0 / om, params.b, 1.0 / om, params.tau);
  Eigen::PolynomialSolver<double, 3> solver(c);
  std::vector<cplx> expected{cplx(0, om), cplx(0, -om)};
  for (Eigen::Index i = 0; i < 3; ++i) expected.push_back(solver.roots()[i] * om);
  return root_set_distance(std::vector<cplx>(rs.roots.begin(), rs.roots.end()), expected);
}

}  // namespace

SpectrumResult spectrum(const RunConfig& cfg) {
  const Basis basis = make_basis(cfg);
  const ModelParams& p = cfg.params;
  SpectrumResult r;
  std::vector<double> lambdas;
  if (cfg.spectrum.domain_eigenvalues) {
    lambdas.assign(basis.eigenvalues().data(), basis.eigenvalues().data() + basis.size());
  } else {
    lambdas = geometric_grid(cfg.spectrum.lambda_min, cfg.spectrum.lambda_max, cfg.spectrum.per_decade);
  }
  r.sweep = sweep(lambdas, p);
  r.predicted_prefactor = p.alpha * p.alpha / (2.0 * (p.b - p.tau));
  r.predicted_imag_prefactor = p.alpha * p.alpha * p.tau / (2.0 * (p.b - p.tau));
  for (double l : lambdas) r.factorization_error = std::max(r.factorization_error, factorization_error(l, p));

  Verdict& v = r.verdict;
  v.require(r.sweep.max_residual <= kRootResidualTol,
            "root residual " + fmt(r.sweep.max_residual) + " > " + fmt(kRootResidualTol));
  v.require(r.factorization_error <= kFactorizationTol,
            "alpha = 0 factorization error " + fmt(r.factorization_error));
  if (p.alpha != 0.0 && !r.sweep.near_resonance) {
    v.require(std::abs(r.sweep.real_fit.exponent + 2.0) <= kExponentTol,
              "real-part exponent " + fmt(r.sweep.real_fit.exponent) + " not within -2 +- 0.05");
    v.require(std::abs(r.sweep.real_prefactor / r.predicted_prefactor - 1.0) <= kPrefactorTol,
              "real-part prefactor " + fmt(r.sweep.real_prefactor) + " not within 2% of " +
                  fmt(r.predicted_prefactor));
    v.require(std::abs(r.sweep.imag_fit.exponent + 1.5) <= kExponentTol,
              "imaginary-defect exponent " + fmt(r.sweep.imag_fit.exponent) +
                  " not within -1.5 +- 0.05");
  }
  return r;
}

// ===========================================================================
// well depth

WellDepthResult well_depth(const RunConfig& cfg) {
  const Basis basis = make_basis(cfg);
  const ModelParams& p = cfg.params;
  WellDepthResult r;
  r.ladder = well_depth_ladder(p, basis, search_config(cfg), cfg.well_depth.modes);
  r.upper = r.ladder.back().estimate.upper;
  for (std::size_t i = 1; i < r.ladder.size(); ++i) {
    if (r.ladder[i].estimate.upper > r.ladder[i - 1].estimate.upper + kMonotoneKTol) r.k_monotone = false;
  }
  r.constants = calibrate_constants(p, basis, cfg.well_depth.eta, cfg.well_depth.eps);
  r.lower = well_depth_lower(r.constants.consts, p);
  r.rho0 = local_positivity_radius(r.constants.consts, p);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  const int n = basis.size();
  for (int i = 0; i < cfg.well_depth.rho_samples; ++i) {
    SpectralField u = random_field(rng, n);
    SpectralField w = random_field(rng, n);
    const double Q = quadratic_form(u, w, p, basis);
    const double s = std::sqrt(r.rho0 * unit(rng) / Q);
    const auto fn = functionals(s * u, s * w, p, basis);
    ++r.rho.samples;
    if (fn.I < 0.25 * fn.Q) ++r.rho.inside_violations;
  }
  // non-vacuity: amplitude scans outward along e_1 and random directions
  for (int d = 0; d < 20 && !r.rho.outside_violation_found; ++d) {
    SpectralField u = d == 0 ? SpectralField::mode(n, 1) : random_field(rng, n);
    SpectralField w = d == 0 ? SpectralField::zero(n) : random_field(rng, n);
    const double Q1 = quadratic_form(u, w, p, basis);
    for (double s = std::sqrt(r.rho0 / Q1); s < 1e4; s *= 1.25) {
      const auto fn = functionals(s * u, s * w, p, basis);
      if (fn.Q > r.rho0 && fn.I < 0.25 * fn.Q) {
        r.rho.outside_violation_found = true;
        r.rho.outside_Q = fn.Q;
        r.rho.outside_ratio = fn.I / fn.Q;
        break;
      }
    }
  }

  Verdict& v = r.verdict;
  v.require(r.lower > 0.0, "lower bound not positive");
  v.require(r.upper > 0.0, "upper estimate not positive");
  v.require(r.lower <= r.upper, "lower bound " + fmt(r.lower) + " exceeds upper " + fmt(r.upper));
  v.require(r.k_monotone, "upper estimate increased with K");
  v.require(r.rho.inside_violations == 0,
            std::to_string(r.rho.inside_violations) + " in-ball samples violate I >= Q/4");
  v.require(r.rho.outside_violation_found, "no out-of-ball violation of I >= Q/4 found");
  return r;
}

// ===========================================================================
// decay study

namespace {

DecayRun decay_run(const std::string& label, const InitialData& data, const RunConfig& cfg,
                   const ModelParams& params, const Basis& basis) {
  IntegrateOptions opt;
  opt.T = cfg.time.T;
  opt.dt = cfg.time.dt;
  opt.snapshot_stride = cfg.time.snapshot_stride;
  const Trajectory tr = integrate(data, opt, params, basis);
  DecayRun r;
  r.label = label;
  r.completed = tr.completed;
  for (const auto& s : tr.records) {
    r.t.push_back(s.state.t);
    r.E.push_back(s.energy.total);
    r.u_energy.push_back(u_energy(s.energy));
  }
  r.E0 = r.E.front();
  r.ET = r.E.back();
  r.u_energy0 = r.u_energy.front();
  r.u_energyT = r.u_energy.back();
  const std::size_t n = r.E.size() - 1;
  const int windows = std::min<int>(cfg.decay.windows, static_cast<int>(n));
  for (int w = 0; w < windows; ++w) {
    const std::size_t a = n * w / windows, b = n * (w + 1) / windows;
    r.window_rates.push_back(-std::log(r.E[b] / r.E[a]) / (r.t[b] - r.t[a]));
  }
  return r;
}

// Amplitude a with E(a e_k) = target, by bisection.
double amplitude_for_energy(int k, double target, const ModelParams& p, const Basis& basis) {
  const int n = basis.size();
  auto e = [&](double a) {
    InitialData d = InitialData::zero(n);
    d.u0 = SpectralField::mode(n, k, a);
    return energy(initial_state(d, p), p, basis).total;
  };
  double lo = 0.0, hi = 1e-3;
  while (e(hi) < target) {
    hi *= 2.0;
    if (hi > 1e6) throw NumericalError("no mode amplitude reaches the target energy");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (e(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

DecayResult decay_study(const RunConfig& cfg, const RunContext& ctx) {
  const Basis basis = make_basis(cfg);
  const ModelParams& p = cfg.params;
  if (p.alpha == 0.0) {
    throw ValidationError(
        "decay study requires 0 < |alpha| < lambda_1 (hypothesis of conditional stability); "
        "alpha = 0 given");
  }
  DecayResult r;
  const InitialData data = initial_data(cfg, basis);
  const SystemState s0 = initial_state(data, p);
  const double E0 = energy(s0, p, basis).total;
  r.depth_estimate = depth_estimate(cfg, basis).upper;
  const auto fn = functionals(s0.u, s0.w, p, basis);
  if (!(fn.I > 0.0 && E0 < r.depth_estimate)) {
    throw ValidationError("decay study requires stable-set data (I > 0, E(0) < d_hat): I = " +
                          fmt(fn.I) + ", E(0) = " + fmt(E0) + ", d_hat = " + fmt(r.depth_estimate));
  }

  const int n = basis.size();
  InitialData low = InitialData::zero(n), high = InitialData::zero(n);
  low.u0 = SpectralField::mode(n, 1, amplitude_for_energy(1, E0, p, basis));
  high.u0 = SpectralField::mode(n, cfg.decay.high_mode,
                                amplitude_for_energy(cfg.decay.high_mode, E0, p, basis));
  ModelParams decoupled = p;
  decoupled.alpha = 0.0;

  const int count = cfg.decay.control ? 4 : 3;
  auto runs = parallel_map<DecayRun>(count, ctx.jobs, [&](int i) {
    switch (i) {
      case 0: return decay_run("base", data, cfg, p, basis);
      case 1: return decay_run("mode-1", low, cfg, p, basis);
      case 2: return decay_run("mode-" + std::to_string(cfg.decay.high_mode), high, cfg, p, basis);
      default: return decay_run("control-alpha0", data, cfg, decoupled, basis);
    }
  });
  r.base = std::move(runs[0]);
  r.low = std::move(runs[1]);
  r.high = std::move(runs[2]);
  if (cfg.decay.control) r.control = std::move(runs[3]);

  Verdict& v = r.verdict;
  for (const DecayRun* run : {&r.base, &r.low, &r.high}) {
    if (!run->completed) {
      v.numerical_failure = true;
      v.require(false, run->label + " run blew up");
    }
  }
  v.require(r.base.ET < r.base.E0, "base run: E(T) >= E(0)");
  v.require(r.high.ratio() > r.low.ratio(),
            "high-mode data decayed faster than mode-1 data (" + fmt(r.high.ratio()) + " <= " +
                fmt(r.low.ratio()) + ")");
  if (r.control) {
    const double drift = std::abs(r.control->u_energyT - r.control->u_energy0);
    v.require(drift <= kControlDrift * std::max(r.control->u_energy0, 1e-300) ||
                  r.control->u_energy0 == 0.0,
              "alpha = 0 control: u-subsystem energy drifted by " + fmt(drift));
  }
  return r;
}

// ===========================================================================
// continuous dependence

double difference_energy(const SystemState& a, const SystemState& b, const ModelParams& params,
                         const Basis& basis) {
  const SpectralField z = a.u - b.u, zt = a.p - b.p, y = a.w - b.w, yt = a.m - b.m, rt = a.q - b.q;
  return 0.5 * l2_norm_sq(zt) + 0.5 * l2_norm_sq(yt) +
         0.5 * params.tau * (params.b - params.tau) * grad_norm_sq(rt, basis) +
         0.5 * grad_norm_sq(z, basis) + 0.5 * grad_norm_sq(y, basis) + params.alpha * l2_inner(z, y);
}

double difference_norm_sq(const SystemState& a, const SystemState& b, const Basis& basis) {
  return l2_norm_sq(a.p - b.p) + l2_norm_sq(a.m - b.m) + grad_norm_sq(a.q - b.q, basis) +
         grad_norm_sq(a.u - b.u, basis) + grad_norm_sq(a.w - b.w, basis);
}

DependenceResult continuous_dependence(const RunConfig& cfg, const RunContext& ctx) {
  const Basis basis = make_basis(cfg);
  const ModelParams& p = cfg.params;
  const int n = basis.size();
  const SystemState s0 = initial_state(initial_data(cfg, basis), p);

  std::mt19937_64 rng(cfg.seed);
  SystemState dir = SystemState::zero(n);
  dir.u = random_field(rng, n);
  dir.p = random_field(rng, n);
  dir.w = random_field(rng, n);
  dir.m = random_field(rng, n);
  dir.q = random_field(rng, n);
  const double norm = std::sqrt(difference_norm_sq(dir, SystemState::zero(n), basis));
  // equivalence constants of the difference energy
  const double lo_c = 0.5 * std::min({1.0, p.tau * (p.b - p.tau), p.coercivity()});
  const double hi_c = 0.5 * std::max({1.0, p.tau * (p.b - p.tau), 2.0 - p.coercivity()});

  const long steps = std::max(1L, static_cast<long>(std::ceil(cfg.time.T / cfg.time.dt - 1e-9)));
  const double dt = cfg.time.T / static_cast<double>(steps);

  DependenceResult r;
  r.runs = parallel_map<DependenceRun>(static_cast<int>(cfg.dependence.deltas.size()), ctx.jobs,
                                       [&](int i) {
    DependenceRun run;
    run.delta = cfg.dependence.deltas[i];
    SystemState a = s0, b = s0;
    const double s = run.delta / norm;
    b.u += s * dir.u;
    b.p += s * dir.p;
    b.w += s * dir.w;
    b.m += s * dir.m;
    b.q += s * dir.q;
    run.Z0 = difference_energy(a, b, p, basis);
    run.t.push_back(0.0);
    run.Z.push_back(run.Z0);
    run.C = run.Z0 > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
    auto check_equiv = [&](double Z) {
      const double N = difference_norm_sq(a, b, basis);
      const double slack = 1e-12 * N;
      if (Z < lo_c * N - slack || Z > hi_c * N + slack) run.equivalence_held = false;
    };
    check_equiv(run.Z0);
    try {
      for (long k = 1; k <= steps; ++k) {
        a = step_rk4(a, dt, p, basis);
        b = step_rk4(b, dt, p, basis);
        if (k % cfg.time.snapshot_stride != 0 && k != steps) continue;
        const double t = dt * static_cast<double>(k);
        const double Z = difference_energy(a, b, p, basis);
        run.t.push_back(t);
        run.Z.push_back(Z);
        check_equiv(Z);
        if (run.Z0 > 0.0) run.C = std::max(run.C, std::log(Z / run.Z0) / t);
      }
      run.completed = true;
    } catch (const BlowupError&) {
      run.completed = false;
    }
    if (run.Z0 > 0.0) {
      for (std::size_t j = 0; j < run.t.size(); ++j) {
        run.envelope_excess = std::max(run.envelope_excess,
                                       run.Z[j] / (run.Z0 * std::exp(run.C * run.t[j])) - 1.0);
      }
    }
    return run;
  });

  Verdict& v = r.verdict;
  const DependenceRun* ref = nullptr;
  for (const auto& run : r.runs) {
    if (!run.completed) {
      v.numerical_failure = true;
      v.require(false, "run at delta = " + fmt(run.delta) + " blew up");
    }
    v.require(run.equivalence_held, "norm equivalence failed at delta = " + fmt(run.delta));
    v.require(run.envelope_excess <= 1e-9, "Z(t) exceeds the exponential envelope");
    if (run.Z0 == 0.0) continue;
    if (!ref) {
      ref = &run;
      continue;
    }
    const double scale = std::abs(ref->C) > 1e-12 ? std::abs(ref->C) : 1.0;
    r.c_spread = std::max(r.c_spread, std::abs(run.C - ref->C) / scale);
  }
  v.require(r.c_spread <= cfg.dependence.c_tolerance,
            "empirical C varies by " + fmt(r.c_spread) + " across deltas");
  return r;
}

// ===========================================================================
// cross validation

namespace {

// Closed-form modal solution of the linear decoupled system at time t.
SystemState linear_exact(const SystemState& s0, double t, const ModelParams& p, const Basis& basis) {
  SystemState out = s0;
  for (int k = 0; k < basis.size(); ++k) {
    const double lam = basis.eigenvalues()[k];
    const double om = std::sqrt(lam);
    out.u.coeffs[k] = std::cos(om * t) * s0.u.coeffs[k] + std::sin(om * t) / om * s0.p.coeffs[k];
    out.p.coeffs[k] = -om * std::sin(om * t) * s0.u.coeffs[k] + std::cos(om * t) * s0.p.coeffs[k];
    Eigen::Matrix3d A;
    A << 0, 1, 0, -lam, 0, -(p.b - p.tau) * lam, 0, 1 / p.tau, -1 / p.tau;
    const Eigen::Vector3d y = (A * t).exp() * Eigen::Vector3d(s0.w.coeffs[k], s0.m.coeffs[k], s0.q.coeffs[k]);
    out.w.coeffs[k] = y[0];
    out.m.coeffs[k] = y[1];
    out.q.coeffs[k] = y[2];
  }
  out.t = t;
  return out;
}

double uw_gap(const SpectralField& u1, const SpectralField& w1, const SpectralField& u2,
              const SpectralField& w2) {
  return std::sqrt((u1.coeffs - u2.coeffs).squaredNorm() + (w1.coeffs - w2.coeffs).squaredNorm());
}

CrossLevel cross_level(const RunConfig& cfg, const Basis& basis, int nodes, double dt_req,
                       int stride) {
  const ModelParams& p = cfg.params;
  const int n = basis.size();
  const FdSolver fd(p, nodes);
  CrossLevel lvl;
  lvl.fd_nodes = nodes;
  const long steps = std::max(1L, static_cast<long>(std::ceil(cfg.time.T / dt_req - 1e-9)));
  const double dt = cfg.time.T / static_cast<double>(steps);
  lvl.dt = dt;
  const bool linear = !p.source_enabled && p.alpha == 0.0;

  const SystemState s0 = initial_state(initial_data(cfg, basis), p);
  SystemState s = s0;
  FdState f = fd.sample(s0, basis);
  auto record = [&](double t) {
    const SpectralField fu = fd.restrict_to(f.u, n), fw = fd.restrict_to(f.w, n);
    const double gap = uw_gap(s.u, s.w, fu, fw);
    lvl.t.push_back(t);
    lvl.gap.push_back(gap);
    lvl.discrepancy = std::max(lvl.discrepancy, gap);
    if (linear) {
      const SystemState ex = linear_exact(s0, t, p, basis);
      lvl.spectral_exact_error = std::max(lvl.spectral_exact_error.value_or(0.0), uw_gap(s.u, s.w, ex.u, ex.w));
      lvl.fd_exact_error = std::max(lvl.fd_exact_error.value_or(0.0), uw_gap(fu, fw, ex.u, ex.w));
    }
  };
  record(0.0);
  try {
    for (long k = 1; k <= steps; ++k) {
      s = step_rk4(s, dt, p, basis);
      f = fd.step(f, dt);
      if (k % stride == 0 || k == steps) record(dt * static_cast<double>(k));
    }
    lvl.completed = true;
  } catch (const BlowupError& e) {
    log_error(std::string("cross-validation blowup: ") + e.what());
  }
  return lvl;
}

}  // namespace

CrossResult cross_validate(const RunConfig& cfg, const RunContext& ctx) {
  const Basis basis = make_basis(cfg);
  if (basis.size() > 32) throw ValidationError("cross-validation requires n_modes <= 32");
  if (cfg.cross_validate.fd_nodes > 513) throw ValidationError("cross-validation requires fd_nodes <= 513");
  CrossResult r;
  r.tolerance = cfg.cross_validate.tolerance;
  const int nodes = cfg.cross_validate.fd_nodes;
  const int count = cfg.cross_validate.refine ? 2 : 1;
  auto levels = parallel_map<CrossLevel>(count, ctx.jobs, [&](int i) {
    return i == 0 ? cross_level(cfg, basis, nodes, cfg.time.dt, cfg.time.snapshot_stride)
                  : cross_level(cfg, basis, 2 * (nodes - 1) + 1, 0.5 * cfg.time.dt,
                                2 * cfg.time.snapshot_stride);
  });
  r.base = std::move(levels[0]);
  if (count == 2) r.refined = std::move(levels[1]);

  Verdict& v = r.verdict;
  for (const CrossLevel* l : {&r.base, r.refined ? &*r.refined : nullptr}) {
    if (l && !l->completed) {
      v.numerical_failure = true;
      v.require(false, "blowup at " + std::to_string(l->fd_nodes) + " FD nodes");
    }
  }
  v.require(r.base.discrepancy <= r.tolerance,
            "discrepancy " + fmt(r.base.discrepancy) + " > " + fmt(r.tolerance));
  if (r.refined && r.base.discrepancy > 0.0 && r.refined->discrepancy > 0.0) {
    r.observed_order = std::log2(r.base.discrepancy / r.refined->discrepancy);
    v.require(*r.observed_order >= kCrossOrderLo && *r.observed_order <= kCrossOrderHi,
              "refinement order " + fmt(*r.observed_order) + " outside [1.7, 2.3]");
  }
  return r;
}

// ===========================================================================
// drivers

namespace {

int finish(RunDirectory& dir, const Verdict& v) {
  const std::string status = v.numerical_failure ? "numerical-failure" : v.passed ? "passed" : "failed";
  dir.finish(status);
  log_info("run finished: " + status + " (" + dir.path().string() + ")");
  for (const auto& f : v.failures) log_error(f);
  if (v.numerical_failure) return kExitNumerical;
  return v.passed ? kExitOk : kExitAcceptance;
}

void write_simulate(RunDirectory& dir, const RunConfig& cfg, const SimulateResult& r) {
  const Basis basis = build_basis(cfg.params.domain);
  CsvTable series({"t", "E", "kin_u", "kin_w", "kin_vt", "pot_u", "pot_w", "coupling", "potentialF",
                   "dissipated", "residual", "Q_alpha", "I_alpha", "J_alpha", "Linf_u"});
  CsvTable monitor({"t", "Q_alpha", "I_alpha", "J_alpha", "I_alpha_positive", "in_well",
                    "uniform_quantity"});
  std::vector<std::string> state_cols{"t"};
  const int n = basis.size();
  for (const char* f : {"u", "p", "w", "m", "q"}) {
    for (int k = 1; k <= n; ++k) state_cols.push_back(std::string(f) + "_" + std::to_string(k));
  }
  CsvTable states(state_cols);
  const auto& rec = r.trajectory.records;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const auto& e = rec[i].energy;
    const auto& m = r.monitor.rows[i];
    const double linf = to_physical(rec[i].state.u, basis).cwiseAbs().maxCoeff();
    series.add_row({m.t, e.total, e.kin_u, e.kin_w, e.kin_vt, e.pot_u, e.pot_w, e.coupling,
                    e.potentialF, e.dissipated, r.residual[i], m.Q, m.I, m.J, linf});
    monitor.add_row({m.t, m.Q, m.I, m.J, (m.origin || m.I > 0.0) ? 1.0 : 0.0, m.in_well ? 1.0 : 0.0,
                     m.uniform_quantity});
    std::vector<double> row{rec[i].state.t};
    for (const SpectralField* f : {&rec[i].state.u, &rec[i].state.p, &rec[i].state.w,
                                   &rec[i].state.m, &rec[i].state.q}) {
      row.insert(row.end(), f->coeffs.data(), f->coeffs.data() + n);
    }
    states.add_row(row);
  }
  dir.write("series.csv", series.str());
  dir.write("monitor.csv", monitor.str());
  dir.write("states.csv", states.str());

  json rep = {{"experiment", "simulate"},
              {"completed", r.trajectory.completed},
              {"blowup_time", r.trajectory.blowup_time ? json(*r.trajectory.blowup_time) : json(nullptr)},
              {"failure", r.trajectory.failure},
              {"E0", rec.front().energy.total},
              {"ET", rec.back().energy.total},
              {"dissipated_T", rec.back().energy.dissipated},
              {"max_abs_residual", 0.0},
              {"energy_monotone", r.energy_monotone},
              {"depth_estimate", r.depth_estimate},
              {"membership_relative_to_estimate", true},
              {"initially_in_well", r.monitor.initially_in_well},
              {"first_nonpositive_I", r.monitor.first_nonpositive_I ? json(*r.monitor.first_nonpositive_I) : json(nullptr)},
              {"first_J_above_depth", r.monitor.first_J_above_depth ? json(*r.monitor.first_J_above_depth) : json(nullptr)},
              {"uniform_bound", num(r.monitor.uniform_bound)},
              {"uniform_max", r.monitor.uniform_max},
              {"verdict", r.verdict.to_json()}};
  double mr = 0.0;
  for (double v : r.residual) mr = std::max(mr, std::abs(v));
  rep["max_abs_residual"] = mr;
  dir.write_json("report.json", rep);

  if (cfg.plots) {
    PlotSpec plot{"energy", "t", "value", false, false, {}};
    std::vector<double> t, E, D;
    for (const auto& s : rec) {
      t.push_back(s.state.t);
      E.push_back(s.energy.total);
      D.push_back(s.energy.dissipated);
    }
    plot.series = {{"E(t)", t, E}, {"dissipated(t)", t, D}};
    dir.write("energy.svg", svg_line_plot(plot));
  }
}

}  // namespace

int run_experiment(ExperimentKind kind, const RunConfig& cfg, const RunContext& ctx) {
  cfg.validate();
  log_info("experiment " + to_string(kind) + " -> " + cfg.output_dir.string());
  RunConfig echo_cfg = cfg;
  echo_cfg.kind = kind;
  RunDirectory dir(cfg.output_dir, to_json(echo_cfg));
  dir.write_json("config.json", to_json(echo_cfg));

  switch (kind) {
    case ExperimentKind::Simulate: {
      const SimulateResult r = simulate(cfg);
      write_simulate(dir, cfg, r);
      return finish(dir, r.verdict);
    }
    case ExperimentKind::EnergyAudit: {
      const AuditResult r = energy_audit(cfg, ctx);
      CsvTable t({"dt", "max_residual", "dissipated_T", "completed"});
      json levels = json::array();
      std::vector<double> dts, res;
      for (const auto& l : r.levels) {
        t.add_row({l.dt, l.max_residual, l.dissipated, l.completed ? 1.0 : 0.0});
        levels.push_back({{"dt", l.dt}, {"max_residual", l.max_residual},
                          {"dissipated_T", l.dissipated}, {"completed", l.completed}});
        dts.push_back(l.dt);
        res.push_back(l.max_residual);
      }
      dir.write("audit.csv", t.str());
      dir.write_json("report.json", {{"experiment", "energy-audit"},
                                     {"levels", levels},
                                     {"fitted_order", num(r.order)},
                                     {"required_order", cfg.audit.min_order},
                                     {"at_roundoff_floor", r.at_floor},
                                     {"roundoff_floor", kResidualFloor},
                                     {"v_data_nonzero", r.v_data_nonzero},
                                     {"verdict", r.verdict.to_json()}});
      if (cfg.plots) {
        dir.write("residual.svg", svg_line_plot({"energy residual", "dt", "max |r|", true, true,
                                                 {{"max |E + D - E0|", dts, res}}}));
      }
      return finish(dir, r.verdict);
    }
    case ExperimentKind::Spectrum: {
      const SpectrumResult r = spectrum(cfg);
      CsvTable t({"lambda", "re_wave", "im_defect", "predicted_re", "predicted_im_defect",
                  "max_residual", "conjugate_gap", "flagged", "max_re_all"});
      std::vector<double> ls, re, im;
      for (const auto& m : r.sweep.records) {
        double max_re = -std::numeric_limits<double>::infinity();
        for (const auto& s : m.roots) max_re = std::max(max_re, s.real());
        t.add_row({m.lambda, m.wave_real(), m.wave_imag_defect(), m.predicted_offset[0].real(),
                   m.predicted_offset[0].imag(), m.max_residual, m.conjugate_gap,
                   m.flagged ? 1.0 : 0.0, max_re});
        ls.push_back(m.lambda);
        re.push_back(-m.wave_real());
        im.push_back(-m.wave_imag_defect());
      }
      dir.write("spectrum.csv", t.str());
      const auto& s = r.sweep;
      dir.write_json("fit.json",
                     {{"experiment", "spectrum"},
                      {"real_exponent", num(s.real_fit.exponent)},
                      {"real_prefactor", num(s.real_prefactor)},
                      {"predicted_real_prefactor", r.predicted_prefactor},
                      {"imag_exponent", num(s.imag_fit.exponent)},
                      {"imag_prefactor", num(s.imag_prefactor)},
                      {"predicted_imag_prefactor", r.predicted_imag_prefactor},
                      {"fit_points", s.real_fit.points},
                      {"max_residual", s.max_residual},
                      {"flagged", s.flagged},
                      {"all_roots_stable_observed", s.all_stable},
                      {"stability_is_observation_only", true},
                      {"near_resonance", s.near_resonance},
                      {"alpha0_factorization_error", r.factorization_error},
                      {"verdict", r.verdict.to_json()}});
      if (cfg.plots) {
        dir.write("spectrum.svg", svg_line_plot({"wave-branch defects", "lambda", "magnitude", true, true,
                                                 {{"-Re s_wave", ls, re}, {"sqrt(lambda) - |Im s_wave|", ls, im}}}));
      }
      return finish(dir, r.verdict);
    }
    case ExperimentKind::WellDepth: {
      const WellDepthResult r = well_depth(cfg);
      CsvTable t({"K", "upper", "witnesses", "discarded", "evaluations"});
      json ladder = json::array();
      for (const auto& l : r.ladder) {
        t.add_row({static_cast<double>(l.modes), l.estimate.upper,
                   static_cast<double>(l.estimate.witnesses.size()),
                   static_cast<double>(l.estimate.discarded),
                   static_cast<double>(l.estimate.evaluations)});
        json wit = json::array();
        for (std::size_t i = 0; i < std::min<std::size_t>(5, l.estimate.witnesses.size()); ++i) {
          const auto& w = l.estimate.witnesses[i];
          wit.push_back({{"J", w.J}, {"scale", w.scale}, {"phi", coeffs_json(w.phi)}, {"psi", coeffs_json(w.psi)}});
        }
        ladder.push_back({{"K", l.modes}, {"upper", l.estimate.upper}, {"discarded", l.estimate.discarded},
                          {"evaluations", l.estimate.evaluations}, {"witnesses", wit}});
      }
      dir.write("ladder.csv", t.str());
      const auto& c = r.constants;
      dir.write_json("report.json",
                     {{"experiment", "well-depth"},
                      {"upper", r.upper},
                      {"lower", r.lower},
                      {"rho0", r.rho0},
                      {"upper_is_estimate_only", true},
                      {"k_monotone", r.k_monotone},
                      {"ladder", ladder},
                      {"constants", {{"eta", c.consts.eta}, {"eps", c.consts.eps},
                                     {"c_eps", c.consts.c_eps}, {"c_eps_log", c.calibration.c_log},
                                     {"c_eps_primitive", c.calibration.c_primitive},
                                     {"c_eps_analytic", c.calibration.c_eps_analytic},
                                     {"c_sobolev", c.consts.c_sobolev},
                                     {"c_sobolev_numeric", c.sobolev_numeric}}},
                      {"rho_test", {{"samples", r.rho.samples}, {"inside_violations", r.rho.inside_violations},
                                    {"outside_violation_found", r.rho.outside_violation_found},
                                    {"outside_Q", r.rho.outside_Q}, {"outside_I_over_Q", r.rho.outside_ratio}}},
                      {"verdict", r.verdict.to_json()}});
      return finish(dir, r.verdict);
    }
    case ExperimentKind::DecayStudy: {
      const DecayResult r = decay_study(cfg, ctx);
      std::vector<std::string> cols{"t", "E_base", "E_mode1", "E_high"};
      if (r.control) cols.push_back("E_u_control");
      CsvTable t(cols);
      const std::size_t rows = std::min({r.base.t.size(), r.low.t.size(), r.high.t.size()});
      for (std::size_t i = 0; i < rows; ++i) {
        std::vector<double> row{r.base.t[i], r.base.E[i], r.low.E[i], r.high.E[i]};
        if (r.control) row.push_back(i < r.control->u_energy.size() ? r.control->u_energy[i] : NAN);
        t.add_row(row);
      }
      dir.write("decay.csv", t.str());
      auto run_json = [](const DecayRun& d) {
        return json{{"label", d.label}, {"E0", d.E0}, {"ET", d.ET}, {"ratio", num(d.ratio())},
                    {"u_energy0", d.u_energy0}, {"u_energyT", d.u_energyT},
                    {"window_rates", d.window_rates}, {"completed", d.completed}};
      };
      json rep = {{"experiment", "decay"},
                  {"qualitative_only", true},
                  {"note", "no uniform decay rate is claimed; ordering and sign checks only"},
                  {"depth_estimate", r.depth_estimate},
                  {"base", run_json(r.base)},
                  {"mode1", run_json(r.low)},
                  {"high", run_json(r.high)},
                  {"verdict", r.verdict.to_json()}};
      if (r.control) rep["control"] = run_json(*r.control);
      dir.write_json("report.json", rep);
      if (cfg.plots) {
        PlotSpec plot{"energy decay", "t", "E(t)", false, true, {}};
        plot.series = {{"base", r.base.t, r.base.E}, {r.low.label, r.low.t, r.low.E},
                       {r.high.label, r.high.t, r.high.E}};
        dir.write("decay.svg", svg_line_plot(plot));
      }
      return finish(dir, r.verdict);
    }
    case ExperimentKind::ContinuousDependence: {
      const DependenceResult r = continuous_dependence(cfg, ctx);
      std::vector<std::string> cols{"t"};
      for (const auto& run : r.runs) cols.push_back("Z_delta_" + fmt(run.delta));
      CsvTable t(cols);
      std::size_t rows = std::numeric_limits<std::size_t>::max();
      for (const auto& run : r.runs) rows = std::min(rows, run.t.size());
      for (std::size_t i = 0; i < rows && !r.runs.empty(); ++i) {
        std::vector<double> row{r.runs[0].t[i]};
        for (const auto& run : r.runs) row.push_back(run.Z[i]);
        t.add_row(row);
      }
      dir.write("dependence.csv", t.str());
      json runs = json::array();
      PlotSpec plot{"difference energy", "t", "Z(t)/Z(0)", false, true, {}};
      for (const auto& run : r.runs) {
        runs.push_back({{"delta", run.delta}, {"Z0", run.Z0}, {"C", num(run.C)},
                        {"envelope_excess", run.envelope_excess},
                        {"equivalence_held", run.equivalence_held}, {"completed", run.completed}});
        std::vector<double> ratio;
        for (double z : run.Z) ratio.push_back(run.Z0 > 0 ? z / run.Z0 : 0.0);
        plot.series.push_back({"delta = " + fmt(run.delta), run.t, ratio});
      }
      dir.write_json("report.json", {{"experiment", "dependence"},
                                     {"runs", runs},
                                     {"c_definition", "sup_t ln(Z(t)/Z(0)) / t"},
                                     {"c_spread", r.c_spread},
                                     {"c_tolerance", cfg.dependence.c_tolerance},
                                     {"verdict", r.verdict.to_json()}});
      if (cfg.plots) dir.write("dependence.svg", svg_line_plot(plot));
      return finish(dir, r.verdict);
    }
    case ExperimentKind::CrossValidate: {
      const CrossResult r = cross_validate(cfg, ctx);
      std::vector<std::string> cols{"t", "gap_base"};
      if (r.refined) cols.push_back("gap_refined");
      CsvTable t(cols);
      for (std::size_t i = 0; i < r.base.t.size(); ++i) {
        std::vector<double> row{r.base.t[i], r.base.gap[i]};
        if (r.refined) row.push_back(i < r.refined->gap.size() ? r.refined->gap[i] : NAN);
        t.add_row(row);
      }
      dir.write("cross.csv", t.str());
      auto level_json = [](const CrossLevel& l) {
        json j{{"fd_nodes", l.fd_nodes}, {"dt", l.dt}, {"discrepancy", l.discrepancy}, {"completed", l.completed}};
        if (l.spectral_exact_error) j["spectral_exact_error"] = *l.spectral_exact_error;
        if (l.fd_exact_error) j["fd_exact_error"] = *l.fd_exact_error;
        return j;
      };
      json rep = {{"experiment", "cross-validate"},
                  {"tolerance", r.tolerance},
                  {"tolerance_basis", "max-over-time L2 gap of (u, w) after projection onto the spectral modes"},
                  {"base", level_json(r.base)},
                  {"order_window", {kCrossOrderLo, kCrossOrderHi}},
                  {"verdict", r.verdict.to_json()}};
      if (r.refined) rep["refined"] = level_json(*r.refined);
      rep["observed_order"] = r.observed_order ? json(*r.observed_order) : json(nullptr);
      dir.write_json("report.json", rep);
      if (cfg.plots) {
        PlotSpec plot{"spectral vs finite differences", "t", "L2 gap", false, true, {}};
        plot.series.push_back({std::to_string(r.base.fd_nodes) + " nodes", r.base.t, r.base.gap});
        if (r.refined) plot.series.push_back({std::to_string(r.refined->fd_nodes) + " nodes", r.refined->t, r.refined->gap});
        dir.write("cross.svg", svg_line_plot(plot));
      }
      return finish(dir, r.verdict);
    }
  }
  throw PreconditionError("unhandled experiment kind");
}

}  // namespace wavemgt::experiments
