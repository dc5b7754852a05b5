#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wavemgt/error.hpp"
#include "wavemgt/experiments/config.hpp"
#include "wavemgt/experiments/logging.hpp"
#include "wavemgt/experiments/runs.hpp"

namespace ex = wavemgt::experiments;

int main(int argc, char** argv) {
  CLI::App app{"wavemgt: coupled wave / MGT experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  for (const char* name : {"simulate", "spectrum", "well-depth", "energy-audit", "decay",
                           "dependence", "cross-validate"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--jobs", jobs, "parallel independent runs")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "RNG seed (overrides config seed)");
  }
  CLI11_PARSE(app, argc, argv);

  ex::init_logging();
  try {
    const auto kind = ex::parse_kind(app.get_subcommands().front()->get_name());
    ex::RunConfig cfg = ex::load_config(config_path);
    if (cfg.kind && *cfg.kind != kind) {
      throw wavemgt::ValidationError("config experiment '" + ex::to_string(*cfg.kind) +
                                     "' does not match subcommand '" + ex::to_string(kind) + "'");
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed) cfg.seed = *seed;
    return ex::run_experiment(kind, cfg, ex::RunContext{jobs});
  } catch (const wavemgt::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return ex::kExitValidation;
  } catch (const wavemgt::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return ex::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
