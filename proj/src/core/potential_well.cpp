#include "wavemgt/potential_well.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wavemgt/error.hpp"
#include "wavemgt/nelder_mead.hpp"

namespace wavemgt {

double quadratic_form(const SpectralField& u, const SpectralField& w, const ModelParams& params,
                      const Basis& basis) {
  return grad_norm_sq(u, basis) + grad_norm_sq(w, basis) + 2.0 * params.alpha * l2_inner(u, w);
}

WellFunctionals functionals(const SpectralField& u, const SpectralField& w,
                            const ModelParams& params, const Basis& basis) {
  basis.check(u);
  basis.check(w);
  const double g = params.gamma;
  const SourceMoments mom = source_moments(u, params.source(), basis);
  WellFunctionals out;
  out.Q = quadratic_form(u, w, params, basis);
  out.lgamma_term = mom.log_moment;
  out.gamma_norm = mom.gamma_moment;
  out.I = out.Q - mom.log_moment;
  out.J = 0.5 * out.Q - mom.log_moment / g + mom.gamma_moment / (g * g);
  return out;
}

// ---------------------------------------------------------------------------

double RayProfile::nehari(double scale) const {
  return scale * scale * Q - std::pow(scale, gamma) * (A * std::log(scale) + B);
}

double RayProfile::energy(double scale) const {
  const double pw = std::pow(scale, gamma);
  return 0.5 * scale * scale * Q - pw * (A * std::log(scale) + B) / gamma +
         pw * A / (gamma * gamma);
}

RayProfile ray_profile(const SpectralField& phi, const SpectralField& psi,
                       const ModelParams& params, const Basis& basis) {
  const SourceMoments mom = source_moments(phi, params.source(), basis);
  return RayProfile{quadratic_form(phi, psi, params, basis), mom.gamma_moment, mom.log_moment,
                    params.gamma};
}

namespace {

// I(lambda) / lambda^2 in x = ln lambda; same sign as I.
double reduced_nehari(const RayProfile& ray, double x) {
  return ray.Q - std::exp((ray.gamma - 2.0) * x) * (ray.A * x + ray.B);
}

double refine_crossing(const RayProfile& ray, double lo, double hi) {
  double f_lo = reduced_nehari(ray, lo);
  double f_hi = reduced_nehari(ray, hi);
  // Bisection to a 1e-8 bracket in ln(lambda), then bracketed secant.
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    const double fm = reduced_nehari(ray, mid);
    if ((fm > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
      f_hi = fm;
    }
  }
  double x = lo;
  for (int it = 0; it < 50; ++it) {
    if (f_hi == f_lo) break;
    x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    x = std::clamp(x, lo, hi);
    const double fx = reduced_nehari(ray, x);
    if (fx == 0.0) break;
    if ((fx > 0.0) == (f_lo > 0.0)) {
      lo = x;
      f_lo = fx;
    } else {
      hi = x;
      f_hi = fx;
    }
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(x))) break;
  }
  return std::exp(x);
}

}  // namespace

std::optional<double> ray_scale_root(const RayProfile& ray) {
  if (!(ray.A > 0.0) || !(ray.Q > 0.0)) return std::nullopt;
  // x^-> e^{(g-2)x}(A x + B) is negative up to its minimum and increasing
  // afterwards, so I changes sign exactly once, from + to -.
  const double lo = std::log(kRayMin);
  const double hi = std::log(kRayMax);
  if (!(reduced_nehari(ray, lo) > 0.0) || !(reduced_nehari(ray, hi) < 0.0)) return std::nullopt;
  return refine_crossing(ray, lo, hi);
}

std::optional<double> ray_scale_root(const SpectralField& phi, const SpectralField& psi,
                                     const ModelParams& params, const Basis& basis) {
  basis.check(phi);
  basis.check(psi);
  if (phi.is_zero()) {
    throw PreconditionError("ray_scale_root requires phi != 0 (the ray (0, psi) never meets N)");
  }
  return ray_scale_root(ray_profile(phi, psi, params, basis));
}

std::vector<RayCrossing> ray_crossings(const RayProfile& ray, std::size_t scan_points) {
  std::vector<RayCrossing> out;
  const double lo = std::log(kRayMin);
  const double hi = std::log(kRayMax);
  double x_prev = lo;
  double f_prev = reduced_nehari(ray, lo);
  for (std::size_t i = 1; i < scan_points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(scan_points - 1);
    const double fx = reduced_nehari(ray, x);
    if ((f_prev > 0.0) != (fx > 0.0)) {
      out.push_back({refine_crossing(ray, x_prev, x), f_prev > 0.0});
    }
    x_prev = x;
    f_prev = fx;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// splitmix64; platform independent, unlike std distributions.
struct Rng {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
};

struct DirectionProblem {
  const ModelParams& params;
  const Basis& basis;
  int K;
  bool phi_only;
  Eigen::MatrixXd synth;  // n_grid x K
  int* discarded;

  struct Eval {
    double J;
    double scale;
    Eigen::VectorXd phi, psi;  // normalized, K coefficients
  };

  std::optional<Eval> evaluate(const Eigen::VectorXd& x) const {
    Eigen::VectorXd phi = x.head(K);
    Eigen::VectorXd psi = phi_only ? Eigen::VectorXd::Zero(K) : Eigen::VectorXd(x.tail(K));
    const Eigen::VectorXd lam = basis.eigenvalues().head(K);
    const double Q = lam.dot(phi.cwiseAbs2() + psi.cwiseAbs2()) + 2.0 * params.alpha * phi.dot(psi);
    if (!(Q > 0.0) || phi.squaredNorm() < 1e-28 * std::max(1.0, x.squaredNorm())) {
      return std::nullopt;
    }
    const double s = 1.0 / std::sqrt(Q);
    phi *= s;
    psi *= s;
    const SourceMoments mom = source_moments_grid(synth * phi, params.source(), basis);
    const RayProfile ray{1.0, mom.gamma_moment, mom.log_moment, params.gamma};
    const auto root = ray_scale_root(ray);
    if (!root) return std::nullopt;
    return Eval{ray.energy(*root), *root, std::move(phi), std::move(psi)};
  }

  double objective(const Eigen::VectorXd& x) const {
    const auto e = evaluate(x);
    if (!e) {
      ++*discarded;
      return std::numeric_limits<double>::infinity();
    }
    return e->J;
  }
};

SpectralField pad(const Eigen::VectorXd& head, int n) {
  SpectralField f = SpectralField::zero(n);
  f.coeffs.head(head.size()) = head;
  return f;
}

}  // namespace

WellDepthEstimate well_depth_upper(const ModelParams& params, const Basis& basis,
                                   const SearchConfig& search,
                                   const std::optional<Eigen::VectorXd>& warm_start) {
  params.validate();
  const int K = search.modes;
  if (K < 1 || K > basis.size()) {
    std::ostringstream msg;
    msg << "search modes K must lie in 1.." << basis.size() << ", got " << K;
    throw ValidationError(msg.str());
  }
  if (search.restarts < 1) throw ValidationError("search restarts >= 1 violated");

  WellDepthEstimate est;
  DirectionProblem prob{params, basis, K, search.phi_only,
                        basis.synthesis().leftCols(K), &est.discarded};
  const int dim = search.phi_only ? K : 2 * K;

  Rng rng{search.seed};
  NelderMeadOptions nm;
  nm.max_evals = search.max_evals;
  nm.initial_step = 0.3;
  nm.f_tol = 1e-13;
  nm.x_tol = 1e-8;

  for (int r = 0; r < search.restarts; ++r) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
    if (r == 0 && warm_start && warm_start->size() == dim) {
      x0 = *warm_start;
    } else if (r == 0) {
      x0[0] = 1.0;
    } else {
      for (Eigen::Index i = 0; i < dim; ++i) x0[i] = rng.normal();
    }
    // Unit Q-normalization of the start keeps the simplex step meaningful.
    if (const auto e = prob.evaluate(x0)) {
      x0.head(K) = e->phi;
      if (!search.phi_only) x0.tail(K) = e->psi;
    }
    const NelderMeadResult res = nelder_mead(
        [&](const Eigen::VectorXd& x) { return prob.objective(x); }, x0, nm);
    est.evaluations += res.evals;
    const auto e = prob.evaluate(res.x);
    if (!e) continue;
    est.witnesses.push_back(
        Witness{pad(e->phi, basis.size()), pad(e->psi, basis.size()), e->scale, e->J});
  }
  if (est.witnesses.empty()) {
    throw NumericalError("well-depth search found no Nehari point in any direction");
  }
  std::stable_sort(est.witnesses.begin(), est.witnesses.end(),
                   [](const Witness& a, const Witness& b) { return a.J < b.J; });
  est.upper = est.witnesses.front().J;
  return est;
}

std::vector<LadderLevel> well_depth_ladder(const ModelParams& params, const Basis& basis,
                                           const SearchConfig& search,
                                           const std::vector<int>& modes) {
  std::vector<LadderLevel> out;
  int prev = 0;
  for (int K : modes) {
    if (K <= prev) throw ValidationError("ladder modes must be strictly increasing");
    SearchConfig level = search;
    level.modes = K;
    std::optional<Eigen::VectorXd> warm;
    if (!out.empty()) {
      // previous best, embedded in the larger truncation
      const Witness& best = out.back().estimate.witnesses.front();
      Eigen::VectorXd x = Eigen::VectorXd::Zero(search.phi_only ? K : 2 * K);
      x.head(K) = best.phi.coeffs.head(K);
      if (!search.phi_only) x.tail(K) = best.psi.coeffs.head(K);
      warm = std::move(x);
    }
    out.push_back(LadderLevel{K, well_depth_upper(params, basis, level, warm)});
    prev = K;
  }
  return out;
}

namespace {

double tilde_constant(const AbsorptionConstants& consts, const ModelParams& params) {
  const double p = params.gamma + consts.eta;
  return consts.c_sobolev * consts.c_eps * std::pow(params.coercivity(), -0.5 * p);
}

void require_smallness(const AbsorptionConstants& consts, const ModelParams& params,
                       double limit, const char* what) {
  params.validate();
  consts.validate(params.source());
  const double ratio = consts.eps / (params.lambda1() * params.coercivity());
  if (ratio > limit) {
    std::ostringstream msg;
    msg << what << " requires eps/(lambda_1 c_alpha) <= " << limit << ", got " << ratio
        << "; recalibrate with eps <= " << limit * params.lambda1() * params.coercivity();
    throw ValidationError(msg.str());
  }
}

}  // namespace

double well_depth_lower(const AbsorptionConstants& consts, const ModelParams& params) {
  require_smallness(consts, params, 0.5, "well-depth lower bound");
  const double g = params.gamma;
  const double c0 =
      std::pow(1.0 / (2.0 * tilde_constant(consts, params)), 2.0 / (g + consts.eta - 2.0));
  return (g - 2.0) / (2.0 * g) * c0;
}

double local_positivity_radius(const AbsorptionConstants& consts, const ModelParams& params) {
  require_smallness(consts, params, 0.25, "local positivity radius");
  return std::pow(1.0 / (2.0 * tilde_constant(consts, params)),
                  2.0 / (params.gamma + consts.eta - 2.0));
}

double sobolev_constant_bound(const DomainSpec& domain, double p) {
  domain.validate();
  if (!(p >= 2.0)) throw ValidationError("sobolev_constant_bound requires p >= 2");
  const double k = std::numbers::pi / domain.length;
  return std::pow(domain.length / 4.0, 0.5 * (p - 2.0)) / (k * k);
}

double estimate_sobolev_constant(const Basis& basis, double p, int modes, int restarts,
                                 std::uint64_t seed) {
  const int K = std::clamp(modes, 1, basis.size());
  const Eigen::MatrixXd synth = basis.synthesis().leftCols(K);
  const Eigen::VectorXd lam = basis.eigenvalues().head(K);
  auto neg_ratio = [&](const Eigen::VectorXd& c) {
    const double grad = lam.dot(c.cwiseAbs2());
    if (!(grad > 0.0)) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd v = synth * (c / std::sqrt(grad));
    return -basis.integrate(v.array().abs().pow(p).matrix());
  };
  Rng rng{seed};
  double best = 0.0;
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(K);
    if (r == 0) {
      x0[0] = 1.0;
    } else {
      for (int i = 0; i < K; ++i) x0[i] = rng.normal();
    }
    const auto res = nelder_mead(neg_ratio, x0, {.max_evals = 2000, .initial_step = 0.3});
    best = std::max(best, -res.value);
  }
  return best;
}

WellConstants calibrate_constants(const ModelParams& params, const Basis& basis, double eta,
                                  std::optional<double> eps) {
  params.validate();
  WellConstants out;
  const double e = eps.value_or(0.25 * params.lambda1() * params.coercivity());
  out.calibration = calibrate_absorption(params.source(), e, eta);
  out.consts.eta = eta;
  out.consts.eps = e;
  out.consts.c_eps = out.calibration.c_eps;
  out.consts.c_sobolev = sobolev_constant_bound(params.domain, params.gamma + eta);
  out.sobolev_numeric = estimate_sobolev_constant(basis, params.gamma + eta);
  out.consts.validate(params.source());
  return out;
}

std::string to_string(Membership m) {
  switch (m) {
    case Membership::StableInterior:
      return "stable-interior";
    case Membership::Origin:
      return "origin";
    case Membership::NehariBoundary:
      return "nehari-boundary";
    case Membership::Outside:
      return "outside";
  }
  return "unknown";
}

Classification classify(const SpectralField& u, const SpectralField& w, double energy_now,
                        const WellDepthEstimate& est, const ModelParams& params,
                        const Basis& basis) {
  Classification c;
  c.values = functionals(u, w, params, basis);
  c.energy_below_depth = energy_now < est.upper;
  if (u.is_zero() && w.is_zero()) {
    c.label = Membership::Origin;
  } else if (std::abs(c.values.I) <= kNehariTol * std::max(1.0, c.values.Q)) {
    c.label = Membership::NehariBoundary;
  } else if (c.values.I > 0.0 && c.values.J < est.upper) {
    c.label = Membership::StableInterior;
  } else {
    c.label = Membership::Outside;
  }
  return c;
}

}  // namespace wavemgt
