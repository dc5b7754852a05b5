#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "wavemgt/error.hpp"
#include "wavemgt/experiments/config.hpp"
#include "wavemgt/experiments/fd_solver.hpp"
#include "wavemgt/experiments/output.hpp"
#include "wavemgt/experiments/profiles.hpp"
#include "wavemgt/experiments/runs.hpp"

using namespace wavemgt;
using namespace wavemgt::experiments;
using nlohmann::json;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

json base_doc() {
  return json::parse(R"j({
    "params": {"tau": 1.0, "b": 2.0, "alpha": 0.5, "gamma": 2.5},
    "domain": {"n_modes": 8, "n_grid": 32},
    "initial": {"u0": "mode(1, 0.2)", "v1": "mode(1, 0.1)"},
    "time": {"dt": 1e-3, "T": 1, "snapshot_stride": 10},
    "well_depth": {"modes": [1, 2], "restarts": 8, "max_evals": 800},
    "seed": 5
  })j");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wavemgt_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const json& doc) {
  try {
    parse_config(doc).validate();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config: defaults, round trip and strictness") {
  const RunConfig cfg = parse_config(base_doc());
  CHECK(cfg.params.domain.length == doctest::Approx(pi));
  CHECK(cfg.params.domain.n_modes == 8);
  CHECK(cfg.seed == 5);
  CHECK(!cfg.kind.has_value());
  CHECK(to_json(parse_config(to_json(cfg))) == to_json(cfg));

  json doc = base_doc();
  doc["params"]["alhpa"] = 0.1;
  CHECK(error_of(doc).find("alhpa") != std::string::npos);

  doc = base_doc();
  doc["extra"] = 1;
  CHECK(error_of(doc).find("extra") != std::string::npos);

  doc = base_doc();
  doc["time"]["dt"] = "small";
  CHECK(error_of(doc).find("time.dt") != std::string::npos);

  doc = base_doc();
  doc["params"]["alpha"] = 1.2;
  CHECK(error_of(doc).find("lambda_1") != std::string::npos);

  doc = base_doc();
  doc["params"]["b"] = 0.5;
  CHECK_FALSE(error_of(doc).empty());

  doc = base_doc();
  doc["experiment"] = "nonsense";
  CHECK(error_of(doc).find("nonsense") != std::string::npos);

  doc = base_doc();
  doc["initial"]["u0"] = "mode(9, 1)";
  CHECK_FALSE(error_of(doc).empty());

  for (const char* k : {"simulate", "spectrum", "well-depth", "energy-audit", "cross-validate",
                        "decay", "dependence"}) {
    CHECK(to_string(parse_kind(k)) == k);
  }
}

TEST_CASE("profiles: modes, lists, gaussian projection, errors") {
  const Basis basis = build_basis(DomainSpec{pi, 8, 256});
  const SpectralField f = evaluate_profile({std::string("mode(2, 0.5) + mode(5, -1)")}, basis);
  for (int k = 1; k <= 8; ++k) {
    const double want = k == 2 ? 0.5 : k == 5 ? -1.0 : 0.0;
    CHECK(f.coeffs[k - 1] == want);
  }
  const SpectralField z = evaluate_profile({std::string("zero")}, basis);
  CHECK(z.is_zero());
  const SpectralField l = evaluate_profile({std::vector<double>{1.0, 2.0}}, basis);
  CHECK(l.coeffs[1] == 2.0);
  CHECK(l.coeffs[7] == 0.0);

  // exact Galerkin coefficients of the gaussian from an independent quadrature
  const SpectralField g = evaluate_profile({std::string("gauss(1.5, 0.4, 0.3)")}, basis);
  for (int k = 1; k <= 8; ++k) {
    const double c = oracle::integrate(
        [&](double x) {
          return 0.3 * std::exp(-std::pow((x - 1.5) / 0.4, 2)) * std::sqrt(2.0 / pi) * std::sin(k * x);
        },
        0.0, pi);
    CHECK(std::abs(g.coeffs[k - 1] - c) < 1e-6);
  }

  CHECK_THROWS_AS(evaluate_profile({std::string("mode(0, 1)")}, basis), ValidationError);
  CHECK_THROWS_AS(evaluate_profile({std::string("mode(1 1)")}, basis), ValidationError);
  CHECK_THROWS_AS(evaluate_profile({std::string("sine(1, 1)")}, basis), ValidationError);
  CHECK_THROWS_AS(evaluate_profile({std::string("gauss(1, 0, 1)")}, basis), ValidationError);
  CHECK_THROWS_AS(check_profile({std::vector<double>(9, 1.0)}, 8), ValidationError);
}

TEST_CASE("output: number formatting, csv and digests") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5e-12) == "-2.5e-12");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(std::nan("")) == "nan");

  CsvTable t({"a", "b"});
  t.add_row({1.0, 0.5});
  CHECK(t.str() == "a,b\n1,0.5\n");
  CHECK_THROWS_AS(t.add_row({1.0}), PreconditionError);

  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  const fs::path dir = scratch("manifest");
  {
    RunDirectory rd(dir, json{{"k", 1}});
    rd.write("a.csv", "x\n1\n");
    rd.write_json("r.json", json{{"v", 2}});
    rd.finish("passed");
  }
  const json m = json::parse(slurp(dir / "manifest.json"));
  CHECK(m["status"] == "passed");
  CHECK(m["artifact_version"] == kArtifactVersion);
  CHECK(m["files"].size() == 2);
  CHECK(verify_manifest(dir).empty());
  CHECK(!fs::exists(dir / "a.csv.tmp"));
  std::ofstream(dir / "a.csv") << "tampered";
  CHECK(verify_manifest(dir) == std::vector<std::string>{"a.csv"});
}

TEST_CASE("fd solver: zero data, ceiling, linear second-order convergence") {
  ModelParams p;
  p.alpha = 0.0;
  p.source_enabled = false;
  p.domain = DomainSpec{pi, 8, 32};
  const Basis basis = build_basis(p.domain);

  const FdSolver fd(p, 65);
  FdState z = fd.sample(SystemState::zero(8), basis);
  for (int i = 0; i < 10; ++i) z = fd.step(z, 1e-3);
  CHECK(z.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(static_cast<void>(fd.step(z, 2.0 * fd.stability_ceiling())), ValidationError);

  // u0 = e_2: exact u = cos(2t) e_2; discrete mode frequency is 2 + O(h^2)
  auto error_at = [&](int nodes) {
    const FdSolver s(p, nodes);
    InitialData d = InitialData::zero(8);
    d.u0 = SpectralField::mode(8, 2);
    FdState f = s.sample(initial_state(d, p), basis);
    const double dt = 1e-3;
    for (int i = 0; i < 1000; ++i) f = s.step(f, dt);
    const SpectralField u = s.restrict_to(f.u, 8);
    return std::abs(u.coeffs[1] - std::cos(2.0));
  };
  const double e1 = error_at(33), e2 = error_at(65);
  CHECK(e2 < e1);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("simulate: zero data gives identically zero series") {
  json doc = base_doc();
  doc["initial"] = json::object();
  const SimulateResult r = simulate(parse_config(doc));
  CHECK(r.trajectory.completed);
  for (const auto& s : r.trajectory.records) {
    CHECK(s.energy.total == 0.0);
    CHECK(s.energy.dissipated == 0.0);
  }
  for (double v : r.residual) CHECK(v == 0.0);
  CHECK(r.verdict.passed);
}

TEST_CASE("simulate: stable data stays in the well, energy nonincreasing") {
  const SimulateResult r = simulate(parse_config(base_doc()));
  CHECK(r.monitor.initially_in_well);
  CHECK(r.monitor.invariant_held());
  CHECK(r.energy_monotone);
  CHECK(r.trajectory.records.back().energy.dissipated > 0.0);
  CHECK(r.verdict.passed);
}

TEST_CASE("energy audit: conservative control sits at the roundoff floor") {
  json doc = base_doc();
  doc["params"]["alpha"] = 0.0;
  doc["initial"] = {{"u0", "mode(1, 0.2) + mode(3, 0.05)"}, {"u1", "mode(2, 0.1)"}};
  const AuditResult r = energy_audit(parse_config(doc), RunContext{2});
  CHECK(r.levels.size() == 3);
  CHECK(r.at_floor);
  CHECK(!r.v_data_nonzero);
  for (const auto& l : r.levels) CHECK(l.max_residual <= 1e-10);
  CHECK(r.verdict.passed);
}

TEST_CASE("spectrum: asymptotic fit on a reduced sweep") {
  json doc = base_doc();
  doc["spectrum"] = {{"lambda_min", 1e4}, {"lambda_max", 1e6}, {"per_decade", 5}};
  const SpectrumResult r = spectrum(parse_config(doc));
  CHECK(r.sweep.records.size() == 11);
  CHECK(r.factorization_error <= 1e-9);
  CHECK(r.predicted_prefactor == doctest::Approx(0.125));
  CHECK(r.verdict.passed);
}

TEST_CASE("well depth: bounds ordered and deterministic under a fixed seed") {
  const RunConfig cfg = parse_config(base_doc());
  const WellDepthResult a = well_depth(cfg);
  const WellDepthResult b = well_depth(cfg);
  CHECK(a.lower > 0.0);
  CHECK(a.lower <= a.upper);
  CHECK(a.upper == b.upper);
  CHECK(a.rho.inside_violations == 0);
  CHECK(a.rho.outside_violation_found);
  CHECK(a.verdict.passed);
}

TEST_CASE("decay: alpha = 0 and unstable data are rejected") {
  json doc = base_doc();
  doc["params"]["alpha"] = 0.0;
  CHECK_THROWS_AS(decay_study(parse_config(doc), RunContext{}), ValidationError);
  doc = base_doc();
  doc["initial"] = {{"u0", "mode(1, 30)"}};
  CHECK_THROWS_AS(decay_study(parse_config(doc), RunContext{}), ValidationError);
}

TEST_CASE("dependence: identical data give Z = 0; small perturbations give stable C") {
  json doc = base_doc();
  doc["dependence"] = {{"deltas", {0.0}}};
  const DependenceResult z = continuous_dependence(parse_config(doc), RunContext{});
  for (double v : z.runs[0].Z) CHECK(v == 0.0);
  CHECK(z.verdict.passed);

  doc["dependence"] = {{"deltas", {1e-4, 1e-5}}};
  doc["time"]["T"] = 3;
  const DependenceResult r = continuous_dependence(parse_config(doc), RunContext{2});
  CHECK(r.runs[0].equivalence_held);
  CHECK(r.c_spread <= 0.2);
  CHECK(r.verdict.passed);
}

TEST_CASE("dependence: difference energy against its hand-written form") {
  ModelParams p;
  p.domain = DomainSpec{pi, 4, 16};
  const Basis basis = build_basis(p.domain);
  SystemState a = SystemState::zero(4), b = SystemState::zero(4);
  a.u.coeffs << 1, 0, 0, 0;   // |grad|^2 = 1
  a.p.coeffs << 0, 2, 0, 0;   // ||.||^2 = 4
  a.w.coeffs << 1, 0, 0, 0;   // (z, y) = 1
  a.q.coeffs << 0, 1, 0, 0;   // |grad|^2 = 4
  const double Z = difference_energy(a, b, p, basis);
  CHECK(Z == doctest::Approx(0.5 * 4 + 0.5 * 1 * 1 * 4 + 0.5 + 0.5 + p.alpha));
  CHECK(difference_norm_sq(a, b, basis) == doctest::Approx(4 + 4 + 1 + 1));
}

TEST_CASE("cross validation: zero data and the linear closed form") {
  json doc = base_doc();
  doc["initial"] = json::object();
  doc["cross_validate"] = {{"fd_nodes", 65}, {"refine", false}};
  const CrossResult z = cross_validate(parse_config(doc), RunContext{});
  CHECK(z.base.discrepancy == 0.0);
  CHECK(z.verdict.passed);

  doc = base_doc();
  doc["params"]["alpha"] = 0.0;
  doc["params"]["source_enabled"] = false;
  doc["initial"] = {{"u0", "mode(1, 0.2) + mode(3, 0.1)"}, {"v1", "mode(2, 0.1)"}};
  doc["cross_validate"] = {{"fd_nodes", 65}, {"refine", false}};
  const CrossResult l = cross_validate(parse_config(doc), RunContext{});
  REQUIRE(l.base.spectral_exact_error);
  REQUIRE(l.base.fd_exact_error);
  CHECK(*l.base.spectral_exact_error < 1e-9);
  CHECK(*l.base.spectral_exact_error < 1e-3 * *l.base.fd_exact_error);

  doc["cross_validate"] = {{"fd_nodes", 1025}};
  CHECK_THROWS_AS(cross_validate(parse_config(doc), RunContext{}), ValidationError);
}

TEST_CASE("run_experiment: byte-identical reruns and verified manifests") {
  RunConfig cfg = parse_config(base_doc());
  cfg.output_dir = scratch("rerun");
  auto run_and_read = [&](ExperimentKind kind, const std::vector<std::string>& files) {
    fs::remove_all(cfg.output_dir);
    CHECK(run_experiment(kind, cfg, RunContext{}) == kExitOk);
    CHECK(verify_manifest(cfg.output_dir).empty());
    std::vector<std::string> out;
    for (const auto& f : files) out.push_back(slurp(cfg.output_dir / f));
    return out;
  };
  const std::vector<std::string> sim{"series.csv", "monitor.csv", "states.csv", "report.json",
                                     "config.json"};
  CHECK(run_and_read(ExperimentKind::Simulate, sim) == run_and_read(ExperimentKind::Simulate, sim));
  const std::vector<std::string> wd{"ladder.csv", "report.json"};
  CHECK(run_and_read(ExperimentKind::WellDepth, wd) == run_and_read(ExperimentKind::WellDepth, wd));
}

TEST_CASE("run_experiment: exit codes") {
  RunConfig cfg = parse_config(base_doc());
  cfg.output_dir = scratch("fail");
  cfg.time.dt = 0.02;
  cfg.time.T = 5.0;
  cfg.audit.min_order = 50.0;
  CHECK(run_experiment(ExperimentKind::EnergyAudit, cfg, RunContext{}) == kExitAcceptance);
  CHECK(json::parse(slurp(cfg.output_dir / "manifest.json"))["status"] == "failed");

  json doc = base_doc();
  doc["initial"] = {{"u0", "mode(1, 20)"}, {"u1", "mode(1, 20)"}};
  doc["time"]["T"] = 5;
  cfg = parse_config(doc);
  cfg.well_depth.modes = {1};
  cfg.output_dir = scratch("blowup");
  CHECK(run_experiment(ExperimentKind::Simulate, cfg, RunContext{}) == kExitNumerical);
  CHECK(json::parse(slurp(cfg.output_dir / "manifest.json"))["status"] == "numerical-failure");

  cfg = parse_config(base_doc());
  cfg.params.alpha = 0.0;
  cfg.output_dir = scratch("invalid");
  CHECK_THROWS_AS(run_experiment(ExperimentKind::DecayStudy, cfg, RunContext{}), ValidationError);
}

TEST_CASE("cli: validation errors exit with 2") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  json doc = base_doc();
  doc["params"]["unknown"] = 1;
  std::ofstream(dir / "bad.json") << doc.dump();
  doc = base_doc();
  doc["experiment"] = "spectrum";
  std::ofstream(dir / "kind.json") << doc.dump();
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(WAVEMGT_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run("simulate --config " + (dir / "bad.json").string() + " --out " + (dir / "o1").string()) == 2);
  CHECK(run("simulate --config " + (dir / "kind.json").string() + " --out " + (dir / "o2").string()) == 2);
}
