#include "wavemgt/experiments/config.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "wavemgt/error.hpp"

namespace wavemgt::experiments {

using nlohmann::json;

namespace {

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::Simulate, "simulate"},
    {ExperimentKind::Spectrum, "spectrum"},
    {ExperimentKind::WellDepth, "well-depth"},
    {ExperimentKind::EnergyAudit, "energy-audit"},
    {ExperimentKind::CrossValidate, "cross-validate"},
    {ExperimentKind::DecayStudy, "decay"},
    {ExperimentKind::ContinuousDependence, "dependence"},
};

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError("config '" + where + "' must be an object");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ValidationError("unknown config key '" + where + key + "'");
  }
}

// Typed field reader: leaves `out` untouched when the key is absent.
template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw ValidationError("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ValidationError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ValidationError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ValidationError("");
    }
    out = it->get<T>();
  } catch (const std::exception&) {
    throw ValidationError("config key '" + where + key + "' has the wrong type");
  }
}

ProfileSpec read_profile(const json& j, const std::string& where) {
  ProfileSpec p;
  if (j.is_string()) {
    p.source = j.get<std::string>();
  } else if (j.is_array()) {
    std::vector<double> c;
    for (const auto& v : j) {
      if (!v.is_number()) throw ValidationError("config '" + where + "' must contain numbers");
      c.push_back(v.get<double>());
    }
    p.source = std::move(c);
  } else {
    throw ValidationError("config '" + where + "' must be a profile string or coefficient list");
  }
  return p;
}

json profile_json(const ProfileSpec& p) {
  if (p.is_expression()) return std::get<std::string>(p.source);
  return std::get<std::vector<double>>(p.source);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw ValidationError("unknown experiment kind '" + name + "'");
}

void RunConfig::validate() const {
  params.validate();
  const int n = params.domain.n_modes;
  for (const auto* p : {&initial.u0, &initial.u1, &initial.v0, &initial.v1, &initial.v2}) {
    check_profile(*p, n);
  }
  if (!(time.dt > 0.0)) throw ValidationError("time.dt > 0 violated");
  if (!(time.T > 0.0)) throw ValidationError("time.T > 0 violated");
  if (time.snapshot_stride < 1) throw ValidationError("time.snapshot_stride >= 1 violated");

  if (!(spectrum.lambda_min >= 1.0 && spectrum.lambda_max <= 1e8 &&
        spectrum.lambda_min < spectrum.lambda_max)) {
    throw ValidationError("spectrum range must satisfy 1 <= lambda_min < lambda_max <= 1e8");
  }
  if (spectrum.per_decade < 1) throw ValidationError("spectrum.per_decade >= 1 violated");

  if (well_depth.modes.empty()) throw ValidationError("well_depth.modes must not be empty");
  int prev = 0;
  for (int k : well_depth.modes) {
    if (k <= prev || k > n) {
      throw ValidationError("well_depth.modes must be strictly increasing within 1..n_modes");
    }
    prev = k;
  }
  if (well_depth.restarts < 1) throw ValidationError("well_depth.restarts >= 1 violated");
  if (well_depth.max_evals < 1) throw ValidationError("well_depth.max_evals >= 1 violated");
  if (!(well_depth.eta > 0.0)) throw ValidationError("well_depth.eta > 0 violated");
  if (well_depth.eps && !(*well_depth.eps > 0.0)) throw ValidationError("well_depth.eps > 0 violated");
  if (well_depth.rho_samples < 0) throw ValidationError("well_depth.rho_samples >= 0 violated");

  if (audit.levels < 2) throw ValidationError("energy_audit.levels >= 2 violated");

  if (cross_validate.fd_nodes < 3 || cross_validate.fd_nodes > 1025) {
    throw ValidationError("cross_validate.fd_nodes must lie in 3..1025");
  }
  if (!(cross_validate.tolerance > 0.0)) throw ValidationError("cross_validate.tolerance > 0 violated");

  if (decay.high_mode < 2 || decay.high_mode > n) {
    throw ValidationError("decay.high_mode must lie in 2..n_modes");
  }
  if (decay.windows < 1) throw ValidationError("decay.windows >= 1 violated");

  if (dependence.deltas.empty()) throw ValidationError("dependence.deltas must not be empty");
  for (double d : dependence.deltas) {
    if (!(d >= 0.0)) throw ValidationError("dependence.deltas >= 0 violated");
  }
}

RunConfig parse_config(const json& doc) {
  reject_unknown(doc,
                 {"experiment", "params", "domain", "initial", "time", "seed", "output",
                  "spectrum", "well_depth", "energy_audit", "cross_validate", "decay",
                  "dependence"},
                 "");
  RunConfig cfg;
  cfg.params.domain.length = std::numbers::pi;

  if (doc.contains("experiment")) {
    std::string k;
    read(doc, "experiment", k, "");
    cfg.kind = parse_kind(k);
  }
  if (const auto it = doc.find("params"); it != doc.end()) {
    reject_unknown(*it, {"tau", "b", "alpha", "gamma", "dimension", "source_enabled"}, "params.");
    read(*it, "tau", cfg.params.tau, "params.");
    read(*it, "b", cfg.params.b, "params.");
    read(*it, "alpha", cfg.params.alpha, "params.");
    read(*it, "gamma", cfg.params.gamma, "params.");
    read(*it, "source_enabled", cfg.params.source_enabled, "params.");
    if (it->contains("dimension")) {
      int d = 0;
      read(*it, "dimension", d, "params.");
      cfg.params.dimension = d;
    }
  }
  if (const auto it = doc.find("domain"); it != doc.end()) {
    reject_unknown(*it, {"length", "n_modes", "n_grid"}, "domain.");
    read(*it, "length", cfg.params.domain.length, "domain.");
    read(*it, "n_modes", cfg.params.domain.n_modes, "domain.");
    read(*it, "n_grid", cfg.params.domain.n_grid, "domain.");
  }
  if (const auto it = doc.find("initial"); it != doc.end()) {
    reject_unknown(*it, {"u0", "u1", "v0", "v1", "v2"}, "initial.");
    const std::pair<const char*, ProfileSpec*> fields[] = {
        {"u0", &cfg.initial.u0}, {"u1", &cfg.initial.u1}, {"v0", &cfg.initial.v0},
        {"v1", &cfg.initial.v1}, {"v2", &cfg.initial.v2}};
    for (const auto& [key, dst] : fields) {
      if (it->contains(key)) *dst = read_profile(it->at(key), std::string("initial.") + key);
    }
  }
  if (const auto it = doc.find("time"); it != doc.end()) {
    reject_unknown(*it, {"dt", "T", "snapshot_stride"}, "time.");
    read(*it, "dt", cfg.time.dt, "time.");
    read(*it, "T", cfg.time.T, "time.");
    read(*it, "snapshot_stride", cfg.time.snapshot_stride, "time.");
  }
  read(doc, "seed", cfg.seed, "");
  if (const auto it = doc.find("output"); it != doc.end()) {
    reject_unknown(*it, {"dir", "plots"}, "output.");
    std::string dir = cfg.output_dir.string();
    read(*it, "dir", dir, "output.");
    cfg.output_dir = dir;
    read(*it, "plots", cfg.plots, "output.");
  }
  if (const auto it = doc.find("spectrum"); it != doc.end()) {
    reject_unknown(*it, {"lambda_min", "lambda_max", "per_decade", "domain_eigenvalues"},
                   "spectrum.");
    read(*it, "lambda_min", cfg.spectrum.lambda_min, "spectrum.");
    read(*it, "lambda_max", cfg.spectrum.lambda_max, "spectrum.");
    read(*it, "per_decade", cfg.spectrum.per_decade, "spectrum.");
    read(*it, "domain_eigenvalues", cfg.spectrum.domain_eigenvalues, "spectrum.");
  }
  if (const auto it = doc.find("well_depth"); it != doc.end()) {
    reject_unknown(*it,
                   {"modes", "restarts", "max_evals", "phi_only", "eta", "eps", "rho_samples"},
                   "well_depth.");
    read(*it, "modes", cfg.well_depth.modes, "well_depth.");
    read(*it, "restarts", cfg.well_depth.restarts, "well_depth.");
    read(*it, "max_evals", cfg.well_depth.max_evals, "well_depth.");
    read(*it, "phi_only", cfg.well_depth.phi_only, "well_depth.");
    read(*it, "eta", cfg.well_depth.eta, "well_depth.");
    read(*it, "rho_samples", cfg.well_depth.rho_samples, "well_depth.");
    if (it->contains("eps")) {
      double e = 0.0;
      read(*it, "eps", e, "well_depth.");
      cfg.well_depth.eps = e;
    }
  }
  if (const auto it = doc.find("energy_audit"); it != doc.end()) {
    reject_unknown(*it, {"levels", "min_order"}, "energy_audit.");
    read(*it, "levels", cfg.audit.levels, "energy_audit.");
    read(*it, "min_order", cfg.audit.min_order, "energy_audit.");
  }
  if (const auto it = doc.find("cross_validate"); it != doc.end()) {
    reject_unknown(*it, {"fd_nodes", "tolerance", "refine"}, "cross_validate.");
    read(*it, "fd_nodes", cfg.cross_validate.fd_nodes, "cross_validate.");
    read(*it, "tolerance", cfg.cross_validate.tolerance, "cross_validate.");
    read(*it, "refine", cfg.cross_validate.refine, "cross_validate.");
  }
  if (const auto it = doc.find("decay"); it != doc.end()) {
    reject_unknown(*it, {"high_mode", "control", "windows"}, "decay.");
    read(*it, "high_mode", cfg.decay.high_mode, "decay.");
    read(*it, "control", cfg.decay.control, "decay.");
    read(*it, "windows", cfg.decay.windows, "decay.");
  }
  if (const auto it = doc.find("dependence"); it != doc.end()) {
    reject_unknown(*it, {"deltas", "c_tolerance"}, "dependence.");
    read(*it, "deltas", cfg.dependence.deltas, "dependence.");
    read(*it, "c_tolerance", cfg.dependence.c_tolerance, "dependence.");
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  json j;
  if (cfg.kind) j["experiment"] = to_string(*cfg.kind);
  j["params"] = {{"tau", cfg.params.tau},
                 {"b", cfg.params.b},
                 {"alpha", cfg.params.alpha},
                 {"gamma", cfg.params.gamma},
                 {"source_enabled", cfg.params.source_enabled}};
  if (cfg.params.dimension) j["params"]["dimension"] = *cfg.params.dimension;
  j["domain"] = {{"length", cfg.params.domain.length},
                 {"n_modes", cfg.params.domain.n_modes},
                 {"n_grid", cfg.params.domain.n_grid}};
  j["initial"] = {{"u0", profile_json(cfg.initial.u0)},
                  {"u1", profile_json(cfg.initial.u1)},
                  {"v0", profile_json(cfg.initial.v0)},
                  {"v1", profile_json(cfg.initial.v1)},
                  {"v2", profile_json(cfg.initial.v2)}};
  j["time"] = {{"dt", cfg.time.dt}, {"T", cfg.time.T}, {"snapshot_stride", cfg.time.snapshot_stride}};
  j["seed"] = cfg.seed;
  j["output"] = {{"dir", cfg.output_dir.generic_string()}, {"plots", cfg.plots}};
  j["spectrum"] = {{"lambda_min", cfg.spectrum.lambda_min},
                   {"lambda_max", cfg.spectrum.lambda_max},
                   {"per_decade", cfg.spectrum.per_decade},
                   {"domain_eigenvalues", cfg.spectrum.domain_eigenvalues}};
  j["well_depth"] = {{"modes", cfg.well_depth.modes},
                     {"restarts", cfg.well_depth.restarts},
                     {"max_evals", cfg.well_depth.max_evals},
                     {"phi_only", cfg.well_depth.phi_only},
                     {"eta", cfg.well_depth.eta},
                     {"rho_samples", cfg.well_depth.rho_samples}};
  if (cfg.well_depth.eps) j["well_depth"]["eps"] = *cfg.well_depth.eps;
  j["energy_audit"] = {{"levels", cfg.audit.levels}, {"min_order", cfg.audit.min_order}};
  j["cross_validate"] = {{"fd_nodes", cfg.cross_validate.fd_nodes},
                         {"tolerance", cfg.cross_validate.tolerance},
                         {"refine", cfg.cross_validate.refine}};
  j["decay"] = {{"high_mode", cfg.decay.high_mode},
                {"control", cfg.decay.control},
                {"windows", cfg.decay.windows}};
  j["dependence"] = {{"deltas", cfg.dependence.deltas},
                     {"c_tolerance", cfg.dependence.c_tolerance}};
  return j;
}

InitialData initial_data(const RunConfig& cfg, const Basis& basis) {
  InitialData d;
  d.u0 = evaluate_profile(cfg.initial.u0, basis);
  d.u1 = evaluate_profile(cfg.initial.u1, basis);
  d.v0 = evaluate_profile(cfg.initial.v0, basis);
  d.v1 = evaluate_profile(cfg.initial.v1, basis);
  d.v2 = evaluate_profile(cfg.initial.v2, basis);
  return d;
}

}  // namespace wavemgt::experiments
