#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "wavemgt/error.hpp"
#include "wavemgt/potential_well.hpp"

using namespace wavemgt;
using std::numbers::pi;

namespace {

ModelParams make_params(double alpha, double gamma, int n = 8, int grid = 64) {
  ModelParams p;
  p.alpha = alpha;
  p.gamma = gamma;
  p.domain = DomainSpec{pi, n, grid};
  return p;
}

SpectralField random_field(oracle::Gen& g, int n, double scale) {
  SpectralField f = SpectralField::zero(n);
  for (int k = 0; k < n; ++k) f.coeffs[k] = scale * g.normal() / (1.0 + k);
  return f;
}

// Single-mode ray e_1 by tanh-sinh quadrature: A = int |e1|^g, B = int |e1|^g ln|e1|.
std::pair<double, double> mode_one_moments(double g, double amp = 1.0) {
  const double c = amp * std::sqrt(2.0 / pi);
  const double A = oracle::integrate([&](double x) { return std::pow(c * std::sin(x), g); }, 0.0, pi);
  const double B = oracle::integrate(
      [&](double x) {
        const double v = c * std::sin(x);
        return v <= 0.0 ? 0.0 : std::pow(v, g) * std::log(v);
      },
      0.0, pi);
  return {A, B};
}

// first + to - sign change of lambda^2 Q - lambda^g (A ln lambda + B) by dense scan + bisection
double scan_root(double Q, double A, double B, double g) {
  auto f = [&](double l) { return l * l * Q - std::pow(l, g) * (A * std::log(l) + B); };
  const int n = 200000;
  double prev_l = 1e-6;
  for (int i = 1; i <= n; ++i) {
    const double l = 1e-6 * std::pow(1e12, static_cast<double>(i) / n);
    if (f(prev_l) > 0.0 && f(l) <= 0.0) {
      double lo = prev_l, hi = l;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev_l = l;
  }
  return std::nan("");
}

}  // namespace

TEST_CASE("functionals on simple states") {
  const ModelParams p = make_params(0.5, 2.5);
  const Basis b = build_basis(p.domain);
  const auto z = functionals(SpectralField::zero(8), SpectralField::zero(8), p, b);
  CHECK(z.Q == 0.0);
  CHECK(z.I == 0.0);
  CHECK(z.J == 0.0);

  const auto w1 = functionals(SpectralField::zero(8), SpectralField::mode(8, 1), p, b);
  CHECK(w1.Q == doctest::Approx(1.0));
  CHECK(w1.I == doctest::Approx(1.0));
  CHECK(w1.J == doctest::Approx(0.5));

  const auto uw = functionals(SpectralField::mode(8, 1), SpectralField::mode(8, 1), p, b);
  CHECK(uw.Q == doctest::Approx(3.0));  // 1 + 1 + 2 * 0.5
}

TEST_CASE("functionals match quadrature oracles for u = c e_1, gamma = 3") {
  const ModelParams p = make_params(0.3, 3.0, 8, 1024);
  const Basis b = build_basis(p.domain);
  for (double c : {0.5, 1.0, 3.0}) {
    const auto fn = functionals(SpectralField::mode(8, 1, c), SpectralField::zero(8), p, b);
    const auto [A, B] = mode_one_moments(3.0, c);
    CHECK(fn.gamma_norm == doctest::Approx(A).epsilon(1e-9));
    CHECK(fn.lgamma_term == doctest::Approx(B).epsilon(1e-8));
    const double identity =
        (3.0 - 2.0) / 6.0 * fn.Q + fn.I / 3.0 + fn.gamma_norm / 9.0;
    CHECK(std::abs(fn.J - identity) <= 1e-9 * std::max(1.0, std::abs(fn.J)));
  }
}

TEST_CASE("coercivity and the J identity on random triples") {
  oracle::Gen g{2024};
  const Basis b = build_basis(DomainSpec{pi, 8, 64});
  for (int trial = 0; trial < 1000; ++trial) {
    ModelParams p = make_params(g.uniform(-0.999, 0.999), g.uniform(2.05, 4.0));
    const double scale = std::exp(g.uniform(-4.0, 2.0));
    const SpectralField u = random_field(g, 8, scale);
    const SpectralField w = random_field(g, 8, scale);
    const auto fn = functionals(u, w, p, b);
    const double grads = grad_norm_sq(u, b) + grad_norm_sq(w, b);
    CHECK(fn.Q >= p.coercivity() * grads - 1e-10 * std::max(1.0, grads));
    const double gam = p.gamma;
    const double rhs = (gam - 2.0) / (2.0 * gam) * fn.Q + fn.I / gam + fn.gamma_norm / (gam * gam);
    const double scl = std::abs(fn.J) + (gam - 2.0) / (2.0 * gam) * std::abs(fn.Q) +
                       std::abs(fn.I) / gam + fn.gamma_norm / (gam * gam);
    CHECK(std::abs(fn.J - rhs) <= 1e-9 * scl);
  }
}

TEST_CASE("ray scaling law") {
  oracle::Gen g{7};
  for (double gamma : {2.5, 3.0}) {
    const ModelParams p = make_params(0.4, gamma);
    const Basis b = build_basis(p.domain);
    for (int trial = 0; trial < 20; ++trial) {
      const SpectralField phi = random_field(g, 8, 1.0);
      const SpectralField psi = random_field(g, 8, 1.0);
      const RayProfile ray = ray_profile(phi, psi, p, b);
      for (double lam : {1e-3, 0.1, 0.7, 1.0, 2.5, 40.0}) {
        const auto fn = functionals(lam * phi, lam * psi, p, b);
        const double scale = lam * lam * ray.Q + std::pow(lam, gamma) * (ray.A + std::abs(ray.B));
        CHECK(std::abs(fn.I - ray.nehari(lam)) <= 1e-12 * scale * (1.0 + std::abs(std::log(lam))));
        CHECK(std::abs(fn.J - ray.energy(lam)) <= 1e-12 * scale * (1.0 + std::abs(std::log(lam))));
      }
    }
  }
}

TEST_CASE("Nehari ray root") {
  const ModelParams p = make_params(0.5, 3.0);
  const Basis b = build_basis(p.domain);

  CHECK_THROWS_AS(ray_scale_root(SpectralField::zero(8), SpectralField::mode(8, 1), p, b),
                  PreconditionError);

  SUBCASE("single mode agrees with a dense scan") {
    const ModelParams p3 = make_params(0.0, 3.0, 8, 1024);
    const Basis b3 = build_basis(p3.domain);
    const auto root = ray_scale_root(SpectralField::mode(8, 1), SpectralField::zero(8), p3, b3);
    REQUIRE(root.has_value());
    const auto [A, B] = mode_one_moments(3.0);
    const double oracle_root = scan_root(1.0, A, B, 3.0);
    CHECK(*root == doctest::Approx(oracle_root).epsilon(1e-8));
    const auto fn = functionals(*root * SpectralField::mode(8, 1), SpectralField::zero(8), p3, b3);
    CHECK(std::abs(fn.I) <= 1e-9 * std::max(1.0, fn.Q));
  }
  SUBCASE("random directions") {
    oracle::Gen g{11};
    for (int trial = 0; trial < 50; ++trial) {
      const SpectralField phi = random_field(g, 8, std::exp(g.uniform(-3.0, 3.0)));
      const SpectralField psi = random_field(g, 8, std::exp(g.uniform(-3.0, 3.0)));
      const RayProfile ray = ray_profile(phi, psi, p, b);
      const auto root = ray_scale_root(phi, psi, p, b);
      REQUIRE(root.has_value());
      const auto fn = functionals(*root * phi, *root * psi, p, b);
      CHECK(std::abs(fn.I) <= 1e-9 * std::max(1.0, fn.Q));
      const auto crossings = ray_crossings(ray);
      REQUIRE_FALSE(crossings.empty());
      CHECK(crossings.size() == 1);
      CHECK(crossings.front().downward);
      CHECK(crossings.front().scale == doctest::Approx(*root).epsilon(1e-9));
      CHECK(*root == doctest::Approx(scan_root(ray.Q, ray.A, ray.B, p.gamma)).epsilon(1e-9));
    }
  }
  SUBCASE("degenerate profile without crossing") {
    CHECK_FALSE(ray_scale_root(RayProfile{1.0, 0.0, 0.0, 3.0}).has_value());
  }
}

TEST_CASE("well depth upper estimate") {
  SUBCASE("K = 1 closed form for gamma = 3, alpha = 0") {
    const ModelParams p = make_params(0.0, 3.0, 8, 1024);
    const Basis b = build_basis(p.domain);
    const auto est = well_depth_upper(p, b, SearchConfig{.modes = 1, .restarts = 10});
    const auto [A, B] = mode_one_moments(3.0);
    const double l = scan_root(1.0, A, B, 3.0);
    const double J = 0.5 * l * l - std::pow(l, 3.0) * (A * std::log(l) + B) / 3.0 +
                     std::pow(l, 3.0) * A / 9.0;
    CHECK(est.upper == doctest::Approx(J).epsilon(1e-7));
  }
  const ModelParams p = make_params(0.5, 2.5);
  const Basis b = build_basis(p.domain);
  SUBCASE("deterministic for a fixed seed") {
    const SearchConfig cfg{.modes = 3, .restarts = 8, .seed = 5};
    const auto a = well_depth_upper(p, b, cfg);
    const auto c = well_depth_upper(p, b, cfg);
    CHECK(a.upper == c.upper);
    CHECK(a.witnesses.size() == c.witnesses.size());
    CHECK(a.evaluations == c.evaluations);
  }
  SUBCASE("phi-only search is no better than the full search") {
    const auto full = well_depth_upper(p, b, SearchConfig{.modes = 4, .restarts = 10});
    const auto phi = well_depth_upper(p, b, SearchConfig{.modes = 4, .restarts = 10, .phi_only = true});
    CHECK(phi.upper >= full.upper - 1e-6);
  }
  SUBCASE("nested truncations are monotone") {
    const auto ladder = well_depth_ladder(p, b, SearchConfig{.restarts = 10}, {1, 2, 4, 8});
    REQUIRE(ladder.size() == 4);
    for (std::size_t i = 1; i < ladder.size(); ++i) {
      CHECK(ladder[i].estimate.upper <= ladder[i - 1].estimate.upper + 1e-6);
    }
    const auto& best = ladder.back().estimate.witnesses.front();
    const auto fn = functionals(best.scale * best.phi, best.scale * best.psi, p, b);
    CHECK(fn.J == doctest::Approx(best.J).epsilon(1e-10));
    CHECK(std::abs(fn.I) <= 1e-9 * std::max(1.0, fn.Q));
    CHECK_THROWS_AS(well_depth_ladder(p, b, SearchConfig{}, {2, 2}), ValidationError);
  }
  CHECK_THROWS_AS(well_depth_upper(p, b, SearchConfig{.modes = 9}), ValidationError);
}

TEST_CASE("well depth lower bound and positivity radius") {
  const ModelParams p = make_params(0.5, 2.5);
  const Basis b = build_basis(p.domain);
  const WellConstants wc = calibrate_constants(p, b, 0.5);
  const double lower = well_depth_lower(wc.consts, p);
  CHECK(lower > 0.0);
  AbsorptionConstants doubled = wc.consts;
  doubled.c_eps *= 2.0;
  CHECK(well_depth_lower(doubled, p) < lower);

  const auto upper = well_depth_upper(p, b, SearchConfig{.modes = 4, .restarts = 10});
  CHECK(lower <= upper.upper);

  CHECK(wc.sobolev_numeric <= wc.consts.c_sobolev);
  CHECK(wc.sobolev_numeric > 0.5 * wc.consts.c_sobolev);

  AbsorptionConstants big = wc.consts;
  big.eps = 0.6 * p.lambda1() * p.coercivity();
  CHECK_THROWS_WITH_AS(well_depth_lower(big, p), doctest::Contains("recalibrate"), ValidationError);
  big.eps = 0.3 * p.lambda1() * p.coercivity();
  CHECK_NOTHROW(well_depth_lower(big, p));
  CHECK_THROWS_AS(local_positivity_radius(big, p), ValidationError);

  const double rho0 = local_positivity_radius(wc.consts, p);
  CHECK(rho0 > 0.0);
  CHECK(lower == doctest::Approx((p.gamma - 2.0) / (2.0 * p.gamma) * rho0));

  oracle::Gen g{99};
  for (int trial = 0; trial < 100; ++trial) {
    SpectralField u = random_field(g, 8, 1.0);
    SpectralField w = random_field(g, 8, 1.0);
    const double Q = quadratic_form(u, w, p, b);
    const double s = std::sqrt(rho0 / Q) * g.uniform(0.01, 1.0);
    u *= s;
    w *= s;
    const auto fn = functionals(u, w, p, b);
    CHECK(fn.Q <= rho0 * (1 + 1e-12));
    CHECK(fn.I >= 0.25 * fn.Q);
  }
  // non-vacuity: a large multiple of e_1 violates the inequality
  bool violated = false;
  for (double amp = 1.0; amp < 1e3 && !violated; amp *= 1.5) {
    const auto fn = functionals(SpectralField::mode(8, 1, amp), SpectralField::zero(8), p, b);
    violated = fn.I < 0.25 * fn.Q && fn.Q > rho0;
  }
  CHECK(violated);
}

TEST_CASE("sobolev constant") {
  CHECK(sobolev_constant_bound(DomainSpec{pi, 4, 8}, 2.0) == doctest::Approx(1.0));
  CHECK(sobolev_constant_bound(DomainSpec{pi, 4, 8}, 3.0) == doctest::Approx(std::sqrt(pi / 4)));
  CHECK_THROWS_AS(sobolev_constant_bound(DomainSpec{pi, 4, 8}, 1.5), ValidationError);
}

TEST_CASE("classification") {
  const ModelParams p = make_params(0.5, 2.5);
  const Basis b = build_basis(p.domain);
  const auto est = well_depth_upper(p, b, SearchConfig{.modes = 4, .restarts = 10});
  const auto z = classify(SpectralField::zero(8), SpectralField::zero(8), 0.0, est, p, b);
  CHECK(z.label == Membership::Origin);
  CHECK(to_string(z.label) == "origin");
  CHECK(z.relative_to_estimate);

  const SpectralField phi = SpectralField::mode(8, 1);
  const SpectralField psi = SpectralField::mode(8, 2, 0.3);
  const auto small = classify(1e-3 * phi, 1e-3 * psi, 0.0, est, p, b);
  CHECK(small.label == Membership::StableInterior);
  CHECK(to_string(small.label) == "stable-interior");

  const auto root = ray_scale_root(phi, psi, p, b);
  REQUIRE(root.has_value());
  const auto nb = classify(*root * phi, *root * psi, 0.0, est, p, b);
  CHECK(nb.label == Membership::NehariBoundary);
  CHECK(to_string(nb.label) == "nehari-boundary");

  const auto out = classify(5.0 * *root * phi, 5.0 * *root * psi, 0.0, est, p, b);
  CHECK(out.label == Membership::Outside);
  CHECK(to_string(out.label) == "outside");
}
