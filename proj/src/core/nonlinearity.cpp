#include "wavemgt/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wavemgt/error.hpp"

namespace wavemgt {

void LogSource::validate() const {
  std::ostringstream msg;
  if (!(gamma > 2.0) || !std::isfinite(gamma)) {
    msg << "gamma > 2 violated: " << gamma;
    throw ValidationError(msg.str());
  }
  if (dimension) {
    const int n = *dimension;
    if (n < 1) {
      msg << "dimension >= 1 violated: " << n;
      throw ValidationError(msg.str());
    }
    if (n >= 3) {
      const double upper = 2.0 * (n - 1) / static_cast<double>(n - 2);
      if (!(gamma < upper)) {
        msg << "gamma < 2(n-1)/(n-2) violated: " << gamma << " >= " << upper << " (n = " << n
            << ")";
        throw ValidationError(msg.str());
      }
    }
  }
}

double f_eval(double s, const LogSource& src) {
  const double a = std::abs(s);
  if (a < kZeroCutoff) return 0.0;
  return std::pow(a, src.gamma - 2.0) * s * std::log(a);
}

double F_eval(double s, const LogSource& src) {
  const double a = std::abs(s);
  if (a < kZeroCutoff) return 0.0;
  const double g = src.gamma;
  return std::pow(a, g) * (std::log(a) / g - 1.0 / (g * g));
}

double f_prime(double s, const LogSource& src) {
  const double a = std::abs(s);
  if (a < kZeroCutoff) return 0.0;
  return std::pow(a, src.gamma - 2.0) * ((src.gamma - 1.0) * std::log(a) + 1.0);
}

SpectralField apply_f(const SpectralField& field, const LogSource& src, const Basis& basis) {
  Eigen::VectorXd grid = to_physical(field, basis);
  for (Eigen::Index j = 0; j < grid.size(); ++j) grid[j] = f_eval(grid[j], src);
  return from_physical(grid, basis);
}

SourceMoments source_moments_grid(const Eigen::VectorXd& grid_values, const LogSource& src,
                                  const Basis& basis) {
  SourceMoments m;
  for (Eigen::Index j = 0; j < grid_values.size(); ++j) {
    const double a = std::abs(grid_values[j]);
    if (a < kZeroCutoff) continue;
    const double pw = std::pow(a, src.gamma);
    const double lg = std::log(a);
    m.log_moment += pw * lg;
    m.gamma_moment += pw;
    m.abs_log_moment += pw * std::abs(lg);
  }
  const double h = basis.spacing();
  m.log_moment *= h;
  m.gamma_moment *= h;
  m.abs_log_moment *= h;
  return m;
}

SourceMoments source_moments(const SpectralField& field, const LogSource& src,
                             const Basis& basis) {
  return source_moments_grid(to_physical(field, basis), src, basis);
}

double potential_integral(const SpectralField& field, const LogSource& src, const Basis& basis) {
  return source_moments(field, src, basis).primitive(src.gamma);
}

// ---------------------------------------------------------------------------

void AbsorptionConstants::validate(const LogSource& src) const {
  std::ostringstream msg;
  if (!(eta > 0.0)) {
    msg << "eta > 0 violated: " << eta;
  } else if (!(eps > 0.0)) {
    msg << "eps > 0 violated: " << eps;
  } else if (!(c_eps > 0.0)) {
    msg << "C_eps > 0 violated: " << c_eps;
  } else if (!(c_sobolev > 0.0)) {
    msg << "C_S > 0 violated: " << c_sobolev;
  } else if (src.dimension && *src.dimension >= 3 &&
             !(src.gamma + eta < 2.0 * *src.dimension / (*src.dimension - 2.0))) {
    msg << "gamma + eta < 2n/(n-2) violated: " << src.gamma + eta;
  } else {
    return;
  }
  throw ValidationError(msg.str());
}

std::string to_string(AbsorptionBound b) {
  switch (b) {
    case AbsorptionBound::Log:
      return "log";
    case AbsorptionBound::Integral:
      return "integral";
    case AbsorptionBound::Source:
      return "source";
    case AbsorptionBound::Primitive:
      return "primitive";
  }
  return "unknown";
}

void AbsorptionReport::merge(const AbsorptionReport& other) {
  checks += other.checks;
  worst_margin = std::max(worst_margin, other.worst_margin);
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

namespace {

// Rounding headroom for lhs <= rhs comparisons.
constexpr double kRelTol = 1e-12;

void record(AbsorptionReport& rep, AbsorptionBound bound, double s, double lhs, double rhs) {
  ++rep.checks;
  const double margin = (lhs - rhs) / std::max(1.0, std::abs(rhs));
  rep.worst_margin = std::max(rep.worst_margin, margin);
  if (lhs > rhs + kRelTol * std::abs(rhs)) rep.violations.push_back({bound, s, lhs, rhs});
}

}  // namespace

AbsorptionReport check_absorption(std::span<const double> samples, const LogSource& src,
                                  const AbsorptionConstants& consts) {
  consts.validate(src);
  const double g = src.gamma;
  AbsorptionReport rep;
  for (double s : samples) {
    const double a = std::abs(s);
    if (a < kZeroCutoff) {
      record(rep, AbsorptionBound::Log, s, 0.0, 0.0);
      record(rep, AbsorptionBound::Source, s, 0.0, 0.0);
      record(rep, AbsorptionBound::Primitive, s, 0.0, 0.0);
      continue;
    }
    const double log_lhs = std::pow(a, g) * std::abs(std::log(a));
    const double quad_rhs = consts.eps * a * a + consts.c_eps * std::pow(a, g + consts.eta);
    record(rep, AbsorptionBound::Log, s, log_lhs, quad_rhs);
    record(rep, AbsorptionBound::Source, s, std::abs(f_eval(s, src)),
           consts.eps * a + consts.c_eps * std::pow(a, g - 1.0 + consts.eta));
    record(rep, AbsorptionBound::Primitive, s, std::abs(F_eval(s, src)), quad_rhs);
  }
  return rep;
}

AbsorptionReport check_integral_absorption(std::span<const SpectralField> profiles,
                                           std::span<const double> amplitudes,
                                           const LogSource& src,
                                           const AbsorptionConstants& consts,
                                           const Basis& basis) {
  consts.validate(src);
  AbsorptionReport rep;
  for (const auto& profile : profiles) {
    const Eigen::VectorXd grid = to_physical(profile, basis);
    const double grad = std::sqrt(grad_norm_sq(profile, basis));
    for (double s : amplitudes) {
      const SourceMoments m = source_moments_grid(s * grid, src, basis);
      const double gs = std::abs(s) * grad;
      const double rhs = consts.eps / basis.lambda1() * gs * gs +
                         consts.c_sobolev * consts.c_eps * std::pow(gs, src.gamma + consts.eta);
      record(rep, AbsorptionBound::Integral, s, m.abs_log_moment, rhs);
    }
  }
  return rep;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw ValidationError("log_spaced requires 0 < lo < hi and count >= 2");
  }
  std::vector<double> out(count);
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = std::exp(a + step * static_cast<double>(i));
  out.front() = lo;
  out.back() = hi;
  return out;
}

AbsorptionCalibration calibrate_absorption(const LogSource& src, double eps, double eta,
                                           double lo, double hi, std::size_t count) {
  src.validate();
  if (!(eps > 0.0) || !(eta > 0.0)) throw ValidationError("calibration requires eps, eta > 0");
  const double g = src.gamma;

  AbsorptionCalibration cal;
  cal.c_log = 0.0;
  cal.c_primitive = 0.0;
  for (double s : log_spaced(lo, hi, count)) {
    const double denom = std::pow(s, g + eta);
    const double log_need = (std::pow(s, g) * std::abs(std::log(s)) - eps * s * s) / denom;
    const double prim_need = (std::abs(F_eval(s, src)) - eps * s * s) / denom;
    cal.c_log = std::max(cal.c_log, log_need);
    cal.c_primitive = std::max(cal.c_primitive, prim_need);
  }
  cal.c_eps = std::max({cal.c_log, cal.c_primitive, std::numeric_limits<double>::min()}) *
              (1.0 + 1e-9);

  // h(s) = s^{g-2}(-ln s) rises on (0, s_peak) and falls on (s_peak, 1).
  const double s_peak = std::exp(-1.0 / (g - 2.0));
  const double h_peak = 1.0 / (std::numbers::e * (g - 2.0));
  if (eps >= h_peak) {
    cal.delta = 1.0 - 1e-12;
  } else {
    double a = 0.0;
    double b = s_peak;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      const double h = std::pow(mid, g - 2.0) * -std::log(mid);
      (h <= eps ? a : b) = mid;
    }
    cal.delta = a;
  }
  cal.c_eps_analytic = std::max(std::abs(std::log(cal.delta)) * std::pow(cal.delta, -eta),
                                1.0 / (std::numbers::e * eta));
  return cal;
}

}  // namespace wavemgt
