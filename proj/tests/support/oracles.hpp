#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical paths.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

/// Double-exponential quadrature; robust to algebraic/log endpoint behaviour.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, tol);
}

/// Integral over (a, b) split at interior points where f is not smooth.
inline double integrate_split(const std::function<double(double)>& f, std::vector<double> cuts,
                              double tol = 1e-13) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) acc += integrate(f, cuts[i], cuts[i + 1], tol);
  return acc;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Plain closed forms of the logarithmic source, written out independently.
inline double source(double s, double g) {
  return s == 0.0 ? 0.0 : std::pow(std::abs(s), g - 2.0) * s * std::log(std::abs(s));
}

/// Durand-Kerner in 50-digit binary floating point.
using mp = boost::multiprecision::cpp_bin_float_50;
using mpc = std::complex<mp>;

inline std::vector<std::complex<double>> durand_kerner(const std::vector<double>& coeffs_low_first,
                                                       int iterations = 200) {
  const int n = static_cast<int>(coeffs_low_first.size()) - 1;
  std::vector<mp> c(coeffs_low_first.begin(), coeffs_low_first.end());
  const mp lead = c[static_cast<std::size_t>(n)];
  for (auto& x : c) x /= lead;
  auto eval = [&](const mpc& z) {
    mpc acc(c[static_cast<std::size_t>(n)], 0);
    for (int j = n - 1; j >= 0; --j) acc = acc * z + mpc(c[static_cast<std::size_t>(j)], 0);
    return acc;
  };
  // Cauchy bound radius for the initial circle.
  mp radius = 0;
  for (int j = 0; j < n; ++j) radius = std::max(radius, boost::multiprecision::abs(c[static_cast<std::size_t>(j)]));
  radius += 1;
  std::vector<mpc> z(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const mp ang = mp(2) * boost::math::constants::pi<mp>() * k / n + mp(0.4);
    z[static_cast<std::size_t>(k)] = mpc(radius * cos(ang), radius * sin(ang));
  }
  for (int it = 0; it < iterations; ++it) {
    for (int k = 0; k < n; ++k) {
      mpc denom(1, 0);
      for (int j = 0; j < n; ++j) {
        if (j != k) denom *= (z[static_cast<std::size_t>(k)] - z[static_cast<std::size_t>(j)]);
      }
      z[static_cast<std::size_t>(k)] -= eval(z[static_cast<std::size_t>(k)]) / denom;
    }
  }
  std::vector<std::complex<double>> out;
  for (const auto& r : z) out.emplace_back(static_cast<double>(r.real()), static_cast<double>(r.imag()));
  return out;
}

/// Max over a of min over b of |a - b|, symmetrized.
inline double hausdorff(const std::vector<std::complex<double>>& a,
                        const std::vector<std::complex<double>>& b, bool relative = false) {
  auto one = [&](const auto& x, const auto& y) {
    double worst = 0.0;
    for (const auto& p : x) {
      double best = INFINITY;
      for (const auto& q : y) best = std::min(best, std::abs(p - q));
      worst = std::max(worst, relative ? best / std::max(1.0, std::abs(p)) : best);
    }
    return worst;
  };
  return std::max(one(a, b), one(b, a));
}

/// Deterministic generator for property tests.
struct Gen {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double normal() {
    const double u1 = 1.0 - uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * uniform());
  }
};

}  // namespace oracle
