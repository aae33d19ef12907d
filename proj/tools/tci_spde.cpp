// tci-spde: run one experiment subcommand from a JSON config.
#include <chrono>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tci/errors.hpp"
#include "tci/experiment.hpp"

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transportation-cost and concentration checks for stochastic PDEs"};
  std::string subcommand;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("subcommand", subcommand, "audit | constants | simulate | verify-t2 | verify-t1 | inequalities")
      ->required()
      ->check(CLI::IsMember(tci::subcommands()));
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--seed", seed, "override experiment_seed");
  app.add_option("--out", out_dir, "output directory (overrides config outputs)");
  app.footer("Worker threads: TCI_SPDE_WORKERS (default: hardware concurrency).");
  CLI11_PARSE(app, argc, argv);

  try {
    tci::ExperimentConfig cfg = tci::load_config(config_path);
    if (seed) cfg.experiment_seed = *seed;
    if (out_dir) cfg.outputs = *out_dir;
    const tci::RunOutput out = tci::run_experiment(subcommand, cfg);
    tci::write_outputs(out, cfg.outputs, utc_timestamp());
    std::cout << subcommand << ": " << (out.failures.empty() ? "pass" : "FAIL") << " (report: " << cfg.outputs
              << "/report.json)\n";
    for (const auto& f : out.failures) std::cout << "  failed: " << f << '\n';
    return out.exit_code();
  } catch (const tci::DivergenceError& e) {
    std::cerr << "divergence at step " << e.step() << ": " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
