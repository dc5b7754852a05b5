#include "wavemgt/experiments/fd_solver.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "wavemgt/error.hpp"
#include "wavemgt/nonlinearity.hpp"

namespace wavemgt::experiments {

bool FdState::all_finite() const {
  return u.allFinite() && p.allFinite() && w.allFinite() && m.allFinite() && q.allFinite();
}

FdSolver::FdSolver(const ModelParams& params, int nodes) : params_(params) {
  params_.validate();
  if (nodes < 3) throw ValidationError("FD grid needs at least 3 nodes");
  h_ = params_.domain.length / (nodes - 1);
  x_ = Eigen::VectorXd::LinSpaced(nodes - 2, h_, h_ * (nodes - 2));
}

double FdSolver::stability_ceiling() const {
  const double lam_max = 4.0 / (h_ * h_);
  return 1.0 / std::sqrt(lam_max * std::max(1.0, params_.b / params_.tau));
}

FdState FdSolver::sample(const SystemState& s, const Basis& basis) const {
  auto at_nodes = [&](const SpectralField& f) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(x_.size());
    for (Eigen::Index j = 0; j < x_.size(); ++j) {
      for (int k = 1; k <= f.size(); ++k) v[j] += f.coeffs[k - 1] * basis.eigenfunction(k, x_[j]);
    }
    return v;
  };
  return FdState{at_nodes(s.u), at_nodes(s.p), at_nodes(s.w), at_nodes(s.m), at_nodes(s.q), s.t};
}

Eigen::VectorXd FdSolver::laplacian(const Eigen::VectorXd& v) const {
  const Eigen::Index n = v.size();
  Eigen::VectorXd out(n);
  const double inv = 1.0 / (h_ * h_);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double left = j > 0 ? v[j - 1] : 0.0;
    const double right = j + 1 < n ? v[j + 1] : 0.0;
    out[j] = (left - 2.0 * v[j] + right) * inv;
  }
  return out;
}

FdState FdSolver::rate(const FdState& s) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(s.u.size());
  if (params_.source_enabled) {
    const LogSource src = params_.source();
    for (Eigen::Index j = 0; j < f.size(); ++j) f[j] = f_eval(s.u[j], src);
  }
  FdState r;
  r.u = s.p;
  r.p = laplacian(s.u) - params_.alpha * s.w + f;
  r.w = s.m;
  r.m = laplacian(s.w) + (params_.b - params_.tau) * laplacian(s.q) - params_.alpha * s.u;
  r.q = (s.m - s.q) / params_.tau;
  return r;
}

FdState FdSolver::step(const FdState& s, double dt) const {
  if (!(dt > 0.0) || dt > stability_ceiling()) {
    std::ostringstream msg;
    msg << "FD dt <= " << stability_ceiling() << " violated: " << dt;
    throw ValidationError(msg.str());
  }
  auto axpy = [](const FdState& a, double c, const FdState& k) {
    return FdState{a.u + c * k.u, a.p + c * k.p, a.w + c * k.w, a.m + c * k.m, a.q + c * k.q, a.t};
  };
  const FdState k1 = rate(s);
  const FdState k2 = rate(axpy(s, 0.5 * dt, k1));
  const FdState k3 = rate(axpy(s, 0.5 * dt, k2));
  const FdState k4 = rate(axpy(s, dt, k3));
  FdState out;
  out.u = s.u + dt / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
  out.p = s.p + dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
  out.w = s.w + dt / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
  out.m = s.m + dt / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m);
  out.q = s.q + dt / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
  out.t = s.t + dt;
  if (!out.all_finite()) throw BlowupError(out.t, "FD solver produced non-finite values");
  return out;
}

SpectralField FdSolver::restrict_to(const Eigen::VectorXd& nodal, int n_modes) const {
  SpectralField out = SpectralField::zero(n_modes);
  const double L = params_.domain.length;
  const double c = std::sqrt(2.0 / L);
  for (int k = 1; k <= n_modes; ++k) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < x_.size(); ++j) {
      acc += nodal[j] * std::sin(k * std::numbers::pi * x_[j] / L);
    }
    out.coeffs[k - 1] = c * h_ * acc;
  }
  return out;
}

}  // namespace wavemgt::experiments
