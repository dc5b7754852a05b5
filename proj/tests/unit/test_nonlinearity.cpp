#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "wavemgt/error.hpp"
#include "wavemgt/nonlinearity.hpp"

using namespace wavemgt;
using std::numbers::pi;

TEST_CASE("source validation") {
  CHECK_NOTHROW(LogSource{2.5}.validate());
  CHECK_NOTHROW(LogSource{10.0}.validate());  // every gamma > 2 is subcritical in 1-D
  CHECK_THROWS_WITH_AS(LogSource{2.0}.validate(), doctest::Contains("gamma > 2"), ValidationError);
  CHECK_NOTHROW((LogSource{3.5, 3}).validate());
  CHECK_THROWS_WITH_AS((LogSource{4.0, 3}).validate(), doctest::Contains("2(n-1)/(n-2)"),
                       ValidationError);
}

TEST_CASE("pointwise f, F, f'") {
  const LogSource g3{3.0};
  const double e = std::numbers::e;
  CHECK(f_eval(1.0, g3) == 0.0);
  CHECK(f_eval(e, g3) == doctest::Approx(e * e).epsilon(1e-15));
  CHECK(f_eval(-e, g3) == doctest::Approx(-e * e).epsilon(1e-15));
  CHECK(F_eval(1.0, g3) == doctest::Approx(-1.0 / 9.0).epsilon(1e-15));
  CHECK(F_eval(0.0, g3) == 0.0);
  CHECK(f_eval(0.0, g3) == 0.0);
  CHECK(f_prime(1.0, g3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f_prime(0.0, g3) == 0.0);
  CHECK(std::isfinite(f_eval(1e-320, g3)));

  const LogSource g25{2.5};
  SUBCASE("F is the primitive of f (quadrature oracle)") {
    for (double s : {0.3, 1.7, 4.0}) {
      const double quad = oracle::integrate([&](double x) { return oracle::source(x, 2.5); }, 0.0, s);
      CHECK(std::abs(quad - F_eval(s, g25)) < 1e-8);
    }
  }
  SUBCASE("f' against central differences") {
    const double fd = oracle::central_difference([&](double x) { return f_eval(x, g25); }, 2.0, 1e-6);
    CHECK(std::abs(fd - f_prime(2.0, g25)) < 1e-5);
  }
  SUBCASE("parity and F' = f at random points") {
    oracle::Gen gen{21};
    for (int i = 0; i < 100; ++i) {
      const double s = gen.uniform(-5.0, 5.0);
      CHECK(f_eval(-s, g25) == -f_eval(s, g25));
      CHECK(F_eval(-s, g25) == F_eval(s, g25));
      const double h = 1e-6 * std::max(1.0, std::abs(s));
      const double fd = oracle::central_difference([&](double x) { return F_eval(x, g25); }, s, h);
      CHECK(std::abs(fd - f_eval(s, g25)) <= 1e-5 * std::max(1.0, std::abs(f_eval(s, g25))));
    }
  }
}

TEST_CASE("Galerkin projection of f") {
  const LogSource src{2.5};
  SUBCASE("zero field") {
    const Basis b = build_basis({pi, 8, 16});
    CHECK(apply_f(SpectralField::zero(8), src, b).is_zero());
  }
  SUBCASE("f vanishes where the synthesized field equals one") {
    const Basis b = build_basis({pi, 8, 16});
    const SpectralField ones = from_physical(Eigen::VectorXd::Ones(16), b);
    const Eigen::VectorXd grid = to_physical(ones, b);
    // Only the first N modes are retained, so the grid values are not all 1;
    // the pointwise values of f at nodes where they are 1 vanish.
    for (int j = 0; j < 16; ++j) {
      if (std::abs(grid[j] - 1.0) < 1e-15) CHECK(f_eval(grid[j], src) == 0.0);
    }
    CHECK(f_eval(1.0, src) == 0.0);
  }
  SUBCASE("equals direct dense quadrature of (f(u), e_k) on the 8N grid") {
    for (const int n : {4, 8, 16, 32}) {
      const int grid = 8 * n;
      const Basis b = build_basis({pi, n, grid});
      oracle::Gen gen{static_cast<std::uint64_t>(n)};
      SpectralField u = SpectralField::mode(n, 1, 0.1);
      for (int k = 1; k < n; ++k) u.coeffs[k] = 0.02 * gen.normal() / (k + 1.0);
      const SpectralField pf = apply_f(u, src, b);
      const double h = pi / (grid + 1);
      double worst = 0.0;
      for (int k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (int j = 1; j <= grid; ++j) {
          const double x = j * h;
          double ux = 0.0;
          for (int l = 1; l <= n; ++l) ux += u.coeffs[l - 1] * std::sqrt(2.0 / pi) * std::sin(l * x);
          acc += h * oracle::source(ux, 2.5) * std::sqrt(2.0 / pi) * std::sin(k * x);
        }
        worst = std::max(worst, std::abs(acc - pf.coeffs[k - 1]));
      }
      INFO("N = " << n << " worst = " << worst);
      CHECK(worst < 1e-8);
    }
  }
  SUBCASE("converges to the exact projection as the grid is refined") {
    // f(u) ~ x^{3/2} ln x at the zeros of u, so the grid rule converges
    // like h^{7/2}; check the observed order on u = 0.1 e_1.
    const int n = 8;
    std::vector<double> errs;
    for (const int grid : {16, 32, 64, 128, 256}) {
      const Basis b = build_basis({pi, n, grid});
      const SpectralField pf = apply_f(SpectralField::mode(n, 1, 0.1), src, b);
      double worst = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double exact = oracle::integrate(
            [&](double x) {
              const double ek = std::sqrt(2.0 / pi) * std::sin(k * x);
              return oracle::source(0.1 * std::sqrt(2.0 / pi) * std::sin(x), 2.5) * ek;
            },
            0.0, pi);
        worst = std::max(worst, std::abs(exact - pf.coeffs[k - 1]));
      }
      errs.push_back(worst);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
      INFO("grid level " << i << " error " << errs[i] << " previous " << errs[i - 1]);
      CHECK(errs[i - 1] / errs[i] > 8.0);
    }
    CHECK(errs.back() < 1e-8);
  }
}

TEST_CASE("epsilon-absorption calibration") {
  const LogSource src{2.5};
  const AbsorptionCalibration cal = calibrate_absorption(src, 0.1, 0.5);
  const AbsorptionConstants consts{0.5, 0.1, cal.c_eps, 1.0};
  const std::vector<double> scan = log_spaced(1e-8, 1e3, 100000);

  SUBCASE("s = 1 has zero left side") {
    const std::vector<double> one{1.0};
    const AbsorptionReport rep = check_absorption(one, src, consts);
    CHECK(rep.passed());
    CHECK(rep.checks == 3);
  }
  SUBCASE("calibrated constant passes the dense rescan, including negative s") {
    CHECK(check_absorption(scan, src, consts).passed());
    std::vector<double> neg(scan.size());
    std::transform(scan.begin(), scan.end(), neg.begin(), [](double s) { return -s; });
    CHECK(check_absorption(neg, src, consts).passed());
  }
  SUBCASE("the constant is tight: 1% smaller fails") {
    const AbsorptionConstants smaller{0.5, 0.1, cal.c_eps * 0.99, 1.0};
    CHECK_FALSE(check_absorption(scan, src, smaller).passed());
  }
  SUBCASE("split-based constant dominates the log part of the scan") {
    CHECK(cal.delta > 0.0);
    CHECK(cal.delta < 1.0);
    CHECK(std::pow(cal.delta, 0.5) * std::abs(std::log(cal.delta)) <= 0.1 * (1 + 1e-9));
    CHECK(cal.c_eps_analytic >= cal.c_log);
    const AbsorptionConstants analytic{0.5, 0.1, cal.c_eps_analytic, 1.0};
    const AbsorptionReport rep = check_absorption(scan, src, analytic);
    for (const auto& v : rep.violations) CHECK(v.bound == AbsorptionBound::Primitive);
  }
  SUBCASE("pointwise source bound |f(s)| <= eps|s| + C|s|^{g-1+eta}") {
    for (double s : scan) {
      CHECK_MESSAGE(std::abs(f_eval(s, src)) <= 0.1 * s + cal.c_eps * std::pow(s, 2.5 - 1.0 + 0.5) * (1 + 1e-12),
                    "s = " << s);
    }
  }
  SUBCASE("invalid constants") {
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(check_absorption(one, src, AbsorptionConstants{0.0, 0.1, 1.0, 1.0}),
                    ValidationError);
    CHECK_THROWS_AS(check_absorption(one, LogSource{2.5, 3}, AbsorptionConstants{3.6, 0.1, 1.0, 1.0}),
                    ValidationError);
  }
}

TEST_CASE("integral absorption with a valid embedding constant") {
  const LogSource src{2.5};
  const Basis b = build_basis({pi, 8, 32});
  const AbsorptionCalibration cal = calibrate_absorption(src, 0.1, 0.5);
  // 1-D bound: ||u||_p^p <= (L/4)^{(p-2)/2} / lambda_1 ||u'||^p
  const double cs = std::pow(pi / 4.0, 0.5);
  const AbsorptionConstants consts{0.5, 0.1, cal.c_eps, cs};
  std::vector<SpectralField> profiles{SpectralField::mode(8, 1), SpectralField::mode(8, 3)};
  SpectralField mix = SpectralField::zero(8);
  mix.coeffs << 1.0, -0.5, 0.25, 0.1, 0.0, 0.05, 0.0, 0.01;
  profiles.push_back(mix);
  const std::vector<double> amps = log_spaced(1e-6, 1e2, 2000);
  const AbsorptionReport rep = check_integral_absorption(profiles, amps, src, consts, b);
  CHECK(rep.checks == 6000);
  CHECK(rep.passed());
}
