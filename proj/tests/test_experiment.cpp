#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tci/errors.hpp"
#include "tci/experiment.hpp"

using namespace tci;
using nlohmann::json;
using doctest::Approx;

namespace {

json small_heat() {
  return json::parse(R"({
    "model": {"kind": "heat"},
    "noise": {"gains": "single_mode", "N_W": 4, "C_B": 1.0},
    "solver": {"dt": 0.01, "T": 1.0, "n_modes": 8},
    "initial": {"type": "zero"},
    "shift": {"h": {"type": "mode", "mode_index": 1, "amplitude": 1.0}},
    "functionals": ["sup_H_norm", "l2_V_path_norm"],
    "replicates": 64,
    "experiment_seed": 11
  })");
}

std::string schema_message(const json& doc) {
  try {
    parse_config(doc);
  } catch (const SchemaError& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config defaults and round trip") {
  const ExperimentConfig c = parse_config(json::object());
  CHECK(c.model.kind == "heat");
  CHECK(c.solver.dt == 1e-3);
  CHECK(c.replicates == 256);
  const json resolved = resolved_config(c);
  const ExperimentConfig again = parse_config(resolved);
  CHECK(resolved_config(again) == resolved);
  CHECK(config_hash(resolved).size() == 16);
  CHECK(config_hash(resolved) == config_hash(resolved_config(again)));
  ExperimentConfig other = c;
  other.experiment_seed = 1;
  CHECK(config_hash(resolved_config(other)) != config_hash(resolved));
}

TEST_CASE("schema errors list every offending field") {
  json doc = small_heat();
  doc["replicates"] = -3;
  doc["model"]["kind"] = "wave";
  doc["bogus"] = 1;
  doc["solver"]["dt"] = "fast";
  const std::string msg = schema_message(doc);
  CHECK(msg.find("replicates") != std::string::npos);
  CHECK(msg.find("model.kind") != std::string::npos);
  CHECK(msg.find("bogus") != std::string::npos);
  CHECK(msg.find("solver.dt") != std::string::npos);
  CHECK(msg.find("4 fields") != std::string::npos);

  CHECK_FALSE(schema_message(json::parse(R"({"functionals": ["nope"]})")).empty());
  CHECK_FALSE(schema_message(json::parse(R"({"noise": {"gains": "white"}})")).empty());
  CHECK_FALSE(schema_message(json::parse(R"({"shift": {"h": {"type": "spiral"}}})")).empty());
  CHECK_FALSE(schema_message(json::parse(R"({"model": {"constants": {"zeta": 1}}})")).empty());
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), SchemaError);
  CHECK_THROWS_AS(run_experiment("dance", parse_config(small_heat())), SchemaError);
}

TEST_CASE("constants subcommand") {
  const json doc = json::parse(R"({"constants": {"T": 1, "K2": 0, "C_B": 1, "C1": 2}})");
  const RunOutput out = run_experiment("constants", parse_config(doc));
  CHECK(out.exit_code() == 0);
  CHECK(out.report.at("results").at("C_T2").get<double>() == Approx(4.0).epsilon(1e-4));
  CHECK(out.report.at("subcommand") == "constants");
  CHECK_FALSE(out.report.contains("timestamp"));
}

TEST_CASE("verify-t2 with a zero shift") {
  json doc = small_heat();
  doc["shift"]["h"]["type"] = "zero";
  const RunOutput out = run_experiment("verify-t2", parse_config(doc));
  CHECK(out.exit_code() == 0);
  const json& r = out.report.at("results");
  CHECK(r.at("contraction").at("sup_gap_sq").at("mean") == 0.0);
  for (const auto& chain : r.at("t2_chain")) CHECK(chain.at("w2") == 0.0);
  CHECK(out.report.at("pass") == true);
}

TEST_CASE("verify-t2 and verify-t1 on small heat runs") {
  const RunOutput t2 = run_experiment("verify-t2", parse_config(small_heat()));
  CHECK(t2.exit_code() == 0);
  CHECK_FALSE(t2.ensemble_csv.empty());
  CHECK(t2.ensemble_csv.rfind("replicate,seed,functional,value\n", 0) == 0);

  json doc = small_heat();
  doc["noise"]["gains"] = "k^-1";
  const RunOutput t1 = run_experiment("verify-t1", parse_config(doc));
  CHECK(t1.exit_code() == 0);
  CHECK(t1.report.at("results").contains("bobkov_gotze"));
}

TEST_CASE("simulate, audit and inequalities") {
  json doc = small_heat();
  doc["replicates"] = 32;
  doc["trajectories"] = 2;
  const RunOutput sim = run_experiment("simulate", parse_config(doc));
  CHECK(sim.exit_code() == 0);
  CHECK(sim.trajectories.size() == 2);
  CHECK(sim.trajectories[0].second.rfind("time,h_norm,v_norm\n", 0) == 0);

  doc["audit"] = json{{"samples", 50}};
  CHECK(run_experiment("audit", parse_config(doc)).exit_code() == 0);
  doc["inequalities"] = json{{"samples", 50}};
  CHECK(run_experiment("inequalities", parse_config(doc)).exit_code() == 0);
}

TEST_CASE("reports are reproducible across runs and worker counts") {
  const ExperimentConfig cfg = parse_config(small_heat());
  const char* saved = std::getenv("TCI_SPDE_WORKERS");
  const std::string saved_value = saved ? saved : "";
  setenv("TCI_SPDE_WORKERS", "1", 1);
  const RunOutput one = run_experiment("verify-t2", cfg);
  setenv("TCI_SPDE_WORKERS", "7", 1);
  const RunOutput many = run_experiment("verify-t2", cfg);
  if (saved) {
    setenv("TCI_SPDE_WORKERS", saved_value.c_str(), 1);
  } else {
    unsetenv("TCI_SPDE_WORKERS");
  }
  CHECK(report_text(one.report) == report_text(many.report));
  CHECK(one.ensemble_csv == many.ensemble_csv);
}

TEST_CASE("write_outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "tci_spde_test_outputs";
  std::filesystem::remove_all(dir);
  json doc = small_heat();
  doc["replicates"] = 8;
  const RunOutput out = run_experiment("verify-t2", parse_config(doc));
  write_outputs(out, dir.string(), "2026-01-01T00:00:00Z");
  const json written = json::parse(slurp(dir / "report.json"));
  CHECK(written.at("timestamp") == "2026-01-01T00:00:00Z");
  CHECK(std::filesystem::exists(dir / "ensemble.csv"));
  CHECK(std::filesystem::exists(dir / "trajectory_0.csv"));
  json without = written;
  without.erase("timestamp");
  CHECK(without == out.report);
  std::filesystem::remove_all(dir);
}
