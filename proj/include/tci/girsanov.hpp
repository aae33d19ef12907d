#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "tci/constants.hpp"
#include "tci/functional.hpp"
#include "tci/shift.hpp"
#include "tci/solver.hpp"
#include "tci/stats.hpp"

namespace tci {

/// Shifted (X) and unshifted (Y) paths driven by the same increments dW~:
///   dX = A(X) dt + B(X) (dW~ + h dt),   dY = A(Y) dt + B(Y) dW~.
/// Under the reweighted measure W~ is Brownian, so Y has the law of the
/// original solution and X the tilted law.
struct CoupledPair {
  Trajectory x_traj;
  Trajectory y_traj;
  double sup_gap_sq = 0.0;
  /// log dQ/dP on the sampled path: sum <h_k, dW_k> - 1/2 int ||h||^2 with
  /// dW = dW~ + h dt; its mean is the entropy 1/2 int ||h||^2.
  double log_rn = 0.0;
  /// Same functional evaluated with the increments read as P-Brownian
  /// (sum <h_k, dW~_k> - 1/2 int ||h||^2); exp of it has mean 1.
  double log_rn_reference = 0.0;
};

CoupledPair coupled_solve(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                          const ShiftFunction& h, const SeedSpec& seed);

inline double log_radon_nikodym(const CoupledPair& pair) { return pair.log_rn; }

/// Per-replicate summary of a coupled run.
struct CoupledSample {
  std::uint32_t replicate = 0;
  bool diverged = false;
  long divergence_step = -1;
  double sup_gap_sq = 0.0;
  double log_rn = 0.0;
  double log_rn_reference = 0.0;
  std::vector<double> fx;  // functionals on X, in the order requested
  std::vector<double> fy;  // functionals on Y
};

struct CoupledEnsemble {
  std::uint64_t experiment_seed = 0;
  std::vector<FunctionalSpec> functionals;
  std::vector<CoupledSample> samples;

  std::vector<std::uint32_t> diverged() const;
  /// Column of a per-sample quantity over non-diverged replicates.
  std::vector<double> gaps() const;
  std::vector<double> log_rns() const;
  std::vector<double> log_rn_references() const;
  std::vector<double> shifted_values(std::size_t functional) const;
  std::vector<double> unshifted_values(std::size_t functional) const;
};

/// Replicate r uses increments from (seed.experiment_seed, r, k). Runs in
/// parallel over replicates; divergences are recorded, not thrown.
CoupledEnsemble run_coupled_ensemble(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                                     const ShiftFunction& h, const std::vector<FunctionalSpec>& functionals,
                                     int replicates, std::uint64_t experiment_seed);

struct ContractionReport {
  MeanEstimate gap;         // E^Q[sup_t ||X_t - Y_t||_H^2]
  double shift_energy = 0;  // int ||h||^2
  double entropy = 0;       // 1/2 int ||h||^2
  T2Constant constant;
  double bound = 0;         // C_T2 int ||h||^2
  double margin = 0;        // bound - (mean + 3 se)
  std::vector<std::uint32_t> diverged;
  bool pass = false;
};

/// K2, C_B and C1 are read from the model's constants, T from cfg.
ContractionReport contraction_report(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                                     const ShiftFunction& h, int replicates, std::uint64_t experiment_seed);
ContractionReport contraction_report(const CoupledEnsemble& ensemble, const ShiftFunction& h,
                                     const T2Constant& constant);

T2ConstantQuery t2_query(const Model& model, double T);

void to_json(nlohmann::json& j, const MeanEstimate& e);
void to_json(nlohmann::json& j, const ContractionReport& r);

}  // namespace tci
