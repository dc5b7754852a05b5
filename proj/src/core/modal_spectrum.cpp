#include "wavemgt/modal_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wavemgt/error.hpp"

namespace wavemgt {

namespace {
constexpr cplx kI{0.0, 1.0};
}

cplx CharPoly::eval_expanded(cplx s) const {
  cplx acc = coeffs[5];
  for (int j = 4; j >= 0; --j) acc = acc * s + coeffs[static_cast<std::size_t>(j)];
  return acc;
}

cplx CharPoly::eval_factored(cplx s) const {
  const cplx mgt = ((tau * s + 1.0) * s + b * lambda) * s + lambda;
  return (s * s + lambda) * mgt - alpha * alpha * (1.0 + tau * s);
}

cplx CharPoly::derivative_factored(cplx s) const {
  const cplx mgt = ((tau * s + 1.0) * s + b * lambda) * s + lambda;
  const cplx dmgt = (3.0 * tau * s + 2.0) * s + b * lambda;
  return 2.0 * s * mgt + (s * s + lambda) * dmgt - alpha * alpha * tau;
}

cplx CharPoly::eval_offset(int sigma, cplx delta) const {
  const cplx a = static_cast<double>(sigma) * std::sqrt(lambda) * kI;
  // Taylor expansion of the MGT cubic about a, using a^2 = -lam.
  const cplx mgt = (b - tau) * lambda * a + ((b - 3.0 * tau) * lambda + 2.0 * a) * delta +
                   (3.0 * tau * a + 1.0) * delta * delta + tau * delta * delta * delta;
  const cplx wave = (2.0 * a + delta) * delta;
  return wave * mgt - alpha * alpha * (1.0 + tau * (a + delta));
}

cplx CharPoly::derivative_offset(int sigma, cplx delta) const {
  const cplx a = static_cast<double>(sigma) * std::sqrt(lambda) * kI;
  const cplx mgt = (b - tau) * lambda * a + ((b - 3.0 * tau) * lambda + 2.0 * a) * delta +
                   (3.0 * tau * a + 1.0) * delta * delta + tau * delta * delta * delta;
  const cplx dmgt = ((b - 3.0 * tau) * lambda + 2.0 * a) + 2.0 * (3.0 * tau * a + 1.0) * delta +
                    3.0 * tau * delta * delta;
  const cplx wave = (2.0 * a + delta) * delta;
  return 2.0 * (a + delta) * mgt + wave * dmgt - alpha * alpha * tau;
}

double CharPoly::scale_at(cplx s) const {
  const double r = std::abs(s);
  double acc = 0.0;
  double pw = 1.0;
  for (double c : coeffs) {
    acc += std::abs(c) * pw;
    pw *= r;
  }
  return acc;
}

CharPoly char_poly(double lambda, const ModelParams& params) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    std::ostringstream msg;
    msg << "char_poly requires lambda_k > 0, got " << lambda;
    throw ValidationError(msg.str());
  }
  CharPoly p;
  p.lambda = lambda;
  p.tau = params.tau;
  p.b = params.b;
  p.alpha = params.alpha;
  const double a2 = params.alpha * params.alpha;
  p.coeffs = {lambda * lambda - a2,
              params.b * lambda * lambda - a2 * params.tau,
              2.0 * lambda,
              (params.b + params.tau) * lambda,
              1.0,
              params.tau};
  return p;
}

namespace {

struct Polished {
  cplx root;
  bool converged;
};

template <typename Eval, typename Deriv>
Polished newton(cplx x, Eval&& eval, Deriv&& deriv, double scale_ref) {
  bool converged = false;
  for (int it = 0; it < 20; ++it) {
    const cplx fx = eval(x);
    const cplx dfx = deriv(x);
    if (fx == 0.0) {
      converged = true;
      break;
    }
    if (dfx == 0.0 || !std::isfinite(std::abs(dfx))) break;
    const cplx step = fx / dfx;
    x -= step;
    if (std::abs(step) <= 4e-16 * std::max(scale_ref, std::abs(x))) {
      converged = true;
      break;
    }
  }
  return {x, converged};
}

}  // namespace

RootSet poly_roots(const CharPoly& poly) {
  if (poly.coeffs[5] == 0.0) throw ValidationError("poly_roots requires c_5 != 0");
  const double omega = std::sqrt(poly.lambda);

  // Monic polynomial in z = s / omega.
  std::array<double, 5> d{};
  for (int j = 0; j < 5; ++j) {
    d[static_cast<std::size_t>(j)] =
        poly.coeffs[static_cast<std::size_t>(j)] * std::pow(omega, j - 5) / poly.coeffs[5];
  }
  Eigen::Matrix<double, 5, 5> comp = Eigen::Matrix<double, 5, 5>::Zero();
  for (int i = 1; i < 5; ++i) comp(i, i - 1) = 1.0;
  for (int j = 0; j < 5; ++j) comp(j, 4) = -d[static_cast<std::size_t>(j)];
  Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> es(comp, false);
  if (es.info() != Eigen::Success) throw NumericalError("companion eigenvalue solve failed");

  RootSet out;
  for (int j = 0; j < 5; ++j) {
    const cplx guess = es.eigenvalues()[j] * omega;
    const Polished pr = newton(
        guess, [&](cplx s) { return poly.eval_factored(s); },
        [&](cplx s) { return poly.derivative_factored(s); }, 1e-300);
    const auto jj = static_cast<std::size_t>(j);
    out.roots[jj] = pr.root;
    out.residual[jj] = std::abs(poly.eval_factored(pr.root)) / poly.scale_at(pr.root);
    out.polished[jj] = pr.converged || out.residual[jj] <= 1e-14;
  }
  return out;
}

BranchSplit classify_branches(const std::array<cplx, 5>& roots, double lambda) {
  const double omega = std::sqrt(lambda);
  BranchSplit out;
  std::array<bool, 5> used{};
  for (int a = 0; a < 2; ++a) {
    const cplx anchor = (a == 0 ? 1.0 : -1.0) * omega * kI;
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    double second_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 5; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double d = std::abs(roots[static_cast<std::size_t>(j)] - anchor);
      const double tie = 1e-12 * std::max(1.0, omega);
      const bool better =
          d < best_d - tie ||
          (std::abs(d - best_d) <= tie && best >= 0 &&
           std::abs(roots[static_cast<std::size_t>(j)].real()) <
               std::abs(roots[static_cast<std::size_t>(best)].real()));
      if (better) {
        second_d = best_d;
        best_d = d;
        best = j;
      } else {
        second_d = std::min(second_d, d);
      }
    }
    if (std::abs(second_d - best_d) <= 1e-12) out.ambiguous = true;
    used[static_cast<std::size_t>(best)] = true;
    out.wave[static_cast<std::size_t>(a)] = roots[static_cast<std::size_t>(best)];
  }
  std::size_t k = 0;
  for (std::size_t j = 0; j < 5; ++j) {
    if (!used[j]) out.mgt[k++] = roots[j];
  }
  return out;
}

namespace {
void require_gap(const ModelParams& params) {
  if (!(params.b > params.tau)) {
    std::ostringstream msg;
    msg << "wave-branch expansion requires b > tau, got b = " << params.b
        << ", tau = " << params.tau;
    throw ValidationError(msg.str());
  }
}
}  // namespace

cplx asymptotic_offset(double lambda, const ModelParams& params, int sigma) {
  require_gap(params);
  const double a2 = params.alpha * params.alpha;
  const double gap = params.b - params.tau;
  const double re = -a2 / (2.0 * gap * lambda * lambda);
  const double im = -static_cast<double>(sigma) * a2 * params.tau /
                    (2.0 * gap * std::pow(lambda, 1.5));
  return {re, im};
}

cplx asymptotic_prediction(double lambda, const ModelParams& params, int sigma) {
  return static_cast<double>(sigma) * std::sqrt(lambda) * kI +
         asymptotic_offset(lambda, params, sigma);
}

cplx asymptotic_prediction_speed_gap(double lambda, const ModelParams& params, int sigma) {
  require_gap(params);
  const double c_w = 1.0;
  const double c_mgt = std::sqrt(params.b / params.tau);
  const double mismatch = params.tau * (c_mgt * c_mgt - c_w * c_w);
  const double a2 = params.alpha * params.alpha;
  const double re = -a2 / (2.0 * mismatch * lambda * lambda);
  const double im = -static_cast<double>(sigma) * a2 * params.tau /
                    (2.0 * mismatch * std::pow(lambda, 1.5));
  return static_cast<double>(sigma) * std::sqrt(lambda) * kI + cplx{re, im};
}

ModalRecord modal_record(double lambda, const ModelParams& params) {
  const CharPoly poly = char_poly(lambda, params);
  const RootSet rs = poly_roots(poly);
  const BranchSplit split = classify_branches(rs.roots, lambda);
  const double omega = std::sqrt(lambda);

  ModalRecord rec;
  rec.lambda = lambda;
  rec.mgt_roots = split.mgt;
  std::ostringstream why;
  if (split.ambiguous) why << "ambiguous branch classification; ";

  for (int j = 0; j < 2; ++j) {
    const int sigma = j == 0 ? 1 : -1;
    const auto jj = static_cast<std::size_t>(j);
    const cplx anchor = static_cast<double>(sigma) * omega * kI;
    cplx start = split.wave[jj] - anchor;
    if (params.b > params.tau && params.alpha != 0.0) {
      const cplx pred = asymptotic_offset(lambda, params, sigma);
      if (std::abs(poly.eval_offset(sigma, pred)) < std::abs(poly.eval_offset(sigma, start))) {
        start = pred;
      }
      rec.predicted_offset[jj] = pred;
    }
    const Polished pr = newton(
        start, [&](cplx d) { return poly.eval_offset(sigma, d); },
        [&](cplx d) { return poly.derivative_offset(sigma, d); }, 1e-300);
    rec.wave_offset[jj] = pr.root;
    rec.wave_pair[jj] = anchor + pr.root;
    const double res = std::abs(poly.eval_offset(sigma, pr.root)) / poly.scale_at(rec.wave_pair[jj]);
    rec.max_residual = std::max(rec.max_residual, res);
    if (!pr.converged && res > 1e-14) why << "wave root " << j << " polish did not converge; ";
  }

  // Assemble the full root set with the refined wave pair.
  rec.roots = {rec.wave_pair[0], rec.wave_pair[1], rec.mgt_roots[0], rec.mgt_roots[1],
               rec.mgt_roots[2]};
  for (std::size_t j = 0; j < 5; ++j) {
    if (j < 2) continue;
    const cplx r = rec.roots[j];
    const double res = std::abs(poly.eval_factored(r)) / poly.scale_at(r);
    rec.max_residual = std::max(rec.max_residual, res);
    bool ok = false;
    for (std::size_t k = 0; k < 5; ++k) {
      if (rs.roots[k] == r) ok = rs.polished[k];
    }
    if (!ok) why << "mgt root polish did not converge; ";
  }
  for (const cplx& r : rec.roots) {
    double best = std::numeric_limits<double>::infinity();
    for (const cplx& o : rec.roots) best = std::min(best, std::abs(std::conj(r) - o));
    rec.conjugate_gap = std::max(rec.conjugate_gap, best / std::max(1.0, std::abs(r)));
  }
  if (rec.max_residual > 1e-6) why << "residual above 1e-6; ";
  rec.flag_reason = why.str();
  rec.flagged = !rec.flag_reason.empty();
  return rec;
}

PowerFit fit_power_law(const std::vector<double>& lambdas, const std::vector<double>& values) {
  if (lambdas.size() != values.size() || lambdas.size() < 2) {
    throw ValidationError("fit_power_law needs at least two matched points");
  }
  const auto n = static_cast<double>(lambdas.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double x = std::log(lambdas[i]);
    const double y = std::log(std::abs(values[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  PowerFit fit;
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.prefactor = std::exp((sy - fit.exponent * sx) / n);
  fit.points = static_cast<int>(lambdas.size());
  return fit;
}

std::vector<double> geometric_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi >= lo) || per_decade < 1) {
    throw ValidationError("geometric_grid requires 0 < lo <= hi and per_decade >= 1");
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  const int count = std::max(1, static_cast<int>(std::lround((b - a) * per_decade)));
  std::vector<double> out;
  for (int i = 0; i <= count; ++i) {
    out.push_back(std::pow(10.0, a + (b - a) * i / static_cast<double>(count)));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

SweepResult sweep(const std::vector<double>& lambdas, const ModelParams& params) {
  params.validate();
  if (lambdas.empty()) throw ValidationError("sweep needs at least one lambda");
  for (double l : lambdas) {
    if (!(l >= 1.0 && l <= 1e8)) {
      std::ostringstream msg;
      msg << "sweep range must lie within [1, 1e8], got " << l;
      throw ValidationError(msg.str());
    }
  }
  SweepResult out;
  out.near_resonance = (params.b - params.tau) / params.tau < kResonanceWarning;
  const double top = *std::max_element(lambdas.begin(), lambdas.end());

  std::vector<double> fit_l, fit_re, fit_im;
  for (double l : lambdas) {
    ModalRecord rec = modal_record(l, params);
    out.max_residual = std::max(out.max_residual, rec.max_residual);
    for (const cplx& r : rec.roots) {
      if (!(r.real() < 0.0)) out.all_stable = false;
    }
    if (rec.flagged) {
      ++out.flagged;
    } else if (l >= top / 10.0 * (1.0 - 1e-12)) {
      fit_l.push_back(l);
      fit_re.push_back(rec.wave_real());
      fit_im.push_back(rec.wave_imag_defect());
    }
    out.records.push_back(std::move(rec));
  }
  if (fit_l.size() >= 2 && params.alpha != 0.0) {
    out.real_fit = fit_power_law(fit_l, fit_re);
    out.imag_fit = fit_power_law(fit_l, fit_im);
    double pr = 0.0, pi = 0.0;
    for (std::size_t i = 0; i < fit_l.size(); ++i) {
      pr += std::abs(fit_re[i]) * fit_l[i] * fit_l[i];
      pi += std::abs(fit_im[i]) * std::pow(fit_l[i], 1.5);
    }
    out.real_prefactor = pr / static_cast<double>(fit_l.size());
    out.imag_prefactor = pi / static_cast<double>(fit_l.size());
  }
  return out;
}

}  // namespace wavemgt
