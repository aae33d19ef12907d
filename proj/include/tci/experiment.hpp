#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace tci {

struct NoiseConfig {
  std::string type = "k^-1";  // "gains": k^-1 | single_mode
  int truncation = 8;         // "N_W"
  double C_B = 1.0;
  std::optional<double> g_min;  // "clamp": [g_min, g_max] or null
  std::optional<double> g_max;
};

struct ModelConfig {
  std::string kind = "heat";  // heat | burgers | ns2d
  double viscosity = 0.1;
  /// Overrides of the structural constants (alpha, theta, K2, ..., C1, f_tilde).
  std::map<std::string, double> constants;
};

struct SolverSection {
  double dt = 1e-3;
  double T = 1.0;
  int n_modes = 32;
  int cutoff = 16;
  bool dealias = true;
  int quadrature_points = 0;
};

struct InitialConfig {
  std::string type = "zero";  // zero | mode | sine | taylor_green | random
  int mode = 1;
  double amplitude = 1.0;
};

struct ShiftConfig {
  std::string type = "zero";  // zero | constant | ramp | mode
  int mode_index = 1;
  double amplitude = 1.0;
};

struct T1Config {
  double c = 0.5;
  std::optional<double> lambda0;  // default: lambda0_fraction of the lemma bound
  double lambda0_fraction = 0.5;
};

/// Explicit T2 query; unset fields come from the model.
struct ConstantsQueryConfig {
  std::optional<double> T;
  std::optional<double> K2;
  std::optional<double> C_B;
  std::optional<double> C1;
};

struct ExperimentConfig {
  ModelConfig model;
  NoiseConfig noise;
  SolverSection solver;
  InitialConfig initial;
  ShiftConfig shift;
  std::vector<std::string> functionals{"sup_H_norm"};
  std::vector<double> lambda_grid{-1.0, -0.5, -0.1, 0.1, 0.5, 1.0};
  std::vector<double> r_grid{0.0, 0.05, 0.1, 0.2, 0.5, 1.0};
  int replicates = 256;
  std::uint64_t experiment_seed = 0;
  std::string outputs = "out";
  T1Config t1;
  ConstantsQueryConfig constants;
  double moment_p = 2.0;
  int audit_samples = 1000;
  int inequality_samples = 1000;
  int trajectories = 1;
};

/// Parses a config document. Every offending field is collected and
/// reported in a single SchemaError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved config (all defaults filled in).
nlohmann::json resolved_config(const ExperimentConfig& cfg);
/// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& resolved);

struct RunOutput {
  nlohmann::json report;  // without timestamp
  std::vector<std::string> failures;
  std::string ensemble_csv;  // empty when the subcommand has no ensemble
  std::vector<std::pair<std::string, std::string>> trajectories;  // file name, CSV body
  int exit_code() const { return failures.empty() ? 0 : 1; }
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand. Throws SchemaError for an unknown subcommand.
RunOutput run_experiment(const std::string& subcommand, const ExperimentConfig& cfg);

/// Writes report.json (with a "timestamp" key), ensemble.csv and
/// trajectory_*.csv into dir, creating it if needed.
void write_outputs(const RunOutput& out, const std::string& dir, const std::string& timestamp);

/// Report JSON without the timestamp key, as written to report.json.
std::string report_text(const nlohmann::json& report);

}  // namespace tci
