#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavemgt/dynamics.hpp"
#include "wavemgt/experiments/profiles.hpp"
#include "wavemgt/model_params.hpp"

namespace wavemgt::experiments {

enum class ExperimentKind {
  Simulate,
  Spectrum,
  WellDepth,
  EnergyAudit,
  CrossValidate,
  DecayStudy,
  ContinuousDependence,
};

/// CLI / config spelling: simulate, spectrum, well-depth, energy-audit,
/// cross-validate, decay, dependence.
std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

struct InitialSpec {
  ProfileSpec u0, u1, v0, v1, v2;
};

struct TimeSpec {
  double dt = 1e-3;
  double T = 10.0;
  int snapshot_stride = 10;
};

struct SpectrumSpec {
  double lambda_min = 1e4;
  double lambda_max = 1e8;
  int per_decade = 10;
  /// use the eigenvalues lambda_1..lambda_N of the configured domain
  /// instead of the continuous grid
  bool domain_eigenvalues = false;
};

struct WellDepthSpec {
  std::vector<int> modes{1, 2, 4, 8};
  int restarts = 50;
  int max_evals = 3000;
  bool phi_only = false;
  double eta = 0.5;
  std::optional<double> eps;
  int rho_samples = 100;
};

struct AuditSpec {
  int levels = 3;  ///< dt, dt/2, dt/4, ...
  double min_order = 3.5;
};

struct CrossValidateSpec {
  int fd_nodes = 257;  ///< including both boundary nodes
  double tolerance = 1e-3;
  bool refine = true;  ///< also run (h/2, dt/2) and report the observed order
};

struct DecaySpec {
  int high_mode = 4;
  bool control = true;  ///< alpha = 0 control run
  int windows = 10;
};

struct DependenceSpec {
  std::vector<double> deltas{1e-4, 1e-5};
  double c_tolerance = 0.2;
};

struct RunConfig {
  std::optional<ExperimentKind> kind;
  ModelParams params;
  InitialSpec initial;
  TimeSpec time;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "runs/out";
  bool plots = true;
  SpectrumSpec spectrum;
  WellDepthSpec well_depth;
  AuditSpec audit;
  CrossValidateSpec cross_validate;
  DecaySpec decay;
  DependenceSpec dependence;

  /// Validates every referenced module invariant; throws ValidationError.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types are ValidationErrors.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Initial data evaluated on the config's basis.
InitialData initial_data(const RunConfig& cfg, const Basis& basis);

}  // namespace wavemgt::experiments
