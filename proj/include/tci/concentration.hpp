#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "tci/functional.hpp"
#include "tci/girsanov.hpp"
#include "tci/solver.hpp"
#include "tci/stats.hpp"

namespace tci {

/// Functional values of one law, one per replicate.
struct Ensemble {
  std::vector<double> values;
  std::vector<SeedSpec> seeds;
  FunctionalSpec functional;
};

// ---------------------------------------------------------------------------
// Path ensembles
// ---------------------------------------------------------------------------

struct PathSample {
  std::uint32_t replicate = 0;
  bool diverged = false;
  long divergence_step = -1;
  double v_energy = 0.0;   // int ||X||_V^2 dt
  double sup_h = 0.0;      // sup_t ||X_t||_H
  std::vector<double> f;   // requested functionals
};

struct PathEnsemble {
  std::uint64_t experiment_seed = 0;
  std::vector<FunctionalSpec> functionals;
  std::vector<PathSample> samples;

  std::vector<std::uint32_t> diverged() const;
  std::vector<double> v_energies() const;
  std::vector<double> sup_h_norms() const;
  /// Ensemble of functional i over non-diverged replicates.
  Ensemble ensemble(std::size_t i) const;
};

/// Replicate r is driven by increments (experiment_seed, r, k). Parallel over
/// replicates; divergences are recorded per replicate.
PathEnsemble run_path_ensemble(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                               const std::vector<FunctionalSpec>& functionals, int replicates,
                               std::uint64_t experiment_seed);

// ---------------------------------------------------------------------------
// Exponential moments
// ---------------------------------------------------------------------------

struct ExpMoment {
  double estimate = 0.0;
  double std_error = 0.0;  // jackknife
  bool infinite = false;   // stabilised exponent above 700
};

/// (1/M) sum exp(lambda (v_i - mean)) with max-subtraction.
ExpMoment exp_moment_empirical(const Ensemble& e, double lambda);
ExpMoment exp_moment_empirical(std::span<const double> values, double lambda);

struct LambdaVerdict {
  double lambda = 0.0;
  ExpMoment moment;
  double bound = 0.0;
  double margin = 0.0;            // bound - estimate
  bool conservative_pass = false; // estimate + 3 se <= bound
  bool violation = false;         // estimate - 3 se > bound, or infinite
};

struct BobkovGotzeReport {
  double C = 0.0;
  double lipschitz = 0.0;
  std::vector<LambdaVerdict> rows;
  bool no_violation() const;
  bool all_conservative() const;
};

/// Compares exp moments with exp(C lambda^2 ||F||_Lip^2 / 2) for each lambda.
BobkovGotzeReport bobkov_gotze_check(const Ensemble& e, double C, std::span<const double> lambda_grid);

struct ExpEstimateReport {
  double c = 0.0;
  double lambda0 = 0.0;
  double exponent_scale = 0.0;  // c lambda0 theta
  double estimate = 0.0;        // E exp(c lambda0 theta int ||X||_V^2)
  double std_error = 0.0;
  bool infinite = false;
  double rhs = 0.0;             // exp(lambda0 int f_tilde) exp(lambda0 ||x0||^2)
  double margin = 0.0;          // rhs - (estimate + 3 se)
  std::vector<std::uint32_t> diverged;
  bool pass = false;
};

/// Exponential estimate of the energy functional. (c, lambda0) must lie in
/// the lemma-version admissible range; throws ParameterError otherwise.
ExpEstimateReport exp_moment_check(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                                   double c, double lambda0, int replicates, std::uint64_t experiment_seed);
ExpEstimateReport exp_moment_check(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                                   double c, double lambda0, const PathEnsemble& ensemble);

/// int_0^T f_tilde(s) ds for the model's schedule (trapezoid, 4096 panels).
double f_tilde_integral(const Model& model, double T);

// ---------------------------------------------------------------------------
// Tails
// ---------------------------------------------------------------------------

struct TailVerdict {
  double r = 0.0;
  double empirical = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  double bound = 0.0;
  bool conservative_pass = false;  // wilson_high <= bound
  bool violation = false;          // wilson_low > bound
};

struct TailReport {
  double C = 0.0;
  double lipschitz = 0.0;
  std::vector<TailVerdict> rows;
  bool no_violation() const;
};

/// P(F - mean >= r) against exp(-r^2 / (2 C ||F||_Lip^2)); Wilson intervals
/// at z = 3.
TailReport gaussian_tail_check(const Ensemble& e, double C, std::span<const double> r_grid);

// ---------------------------------------------------------------------------
// Wasserstein distances
// ---------------------------------------------------------------------------

/// Exact W2 between equal-size 1-D empirical measures.
double w2_sorted_1d(std::span<const double> a, std::span<const double> b);

/// Squared Euclidean distances between the rows of a and b.
Eigen::MatrixXd squared_distance_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Minimum-cost perfect matching (Hungarian method); assignment[i] is the
/// column matched to row i.
std::vector<int> optimal_assignment(const Eigen::MatrixXd& cost);

/// Exact W2 between equal-size point clouds (rows are points), n <= 256 and
/// d <= 8. The matched cost is summed in row order.
double w2_small_cloud(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// ---------------------------------------------------------------------------
// T2 chain and moments
// ---------------------------------------------------------------------------

struct T2ChainReport {
  std::string functional;
  double lipschitz = 0.0;
  double entropy = 0.0;        // H = 1/2 int ||h||^2
  double w2 = 0.0;             // between shifted and unshifted functional samples
  double combined_se = 0.0;    // sqrt(var_X / M + var_Y / M)
  T2Constant constant;
  double bound = 0.0;          // ||F||_Lip sqrt(2 C_T2 H)
  double margin = 0.0;         // bound - w2
  double margin_in_se = 0.0;   // margin / combined_se (inf if se = 0)
  std::vector<std::uint32_t> diverged;
  bool pass = false;           // w2 <= bound + 3 combined_se
};

T2ChainReport t2_chain_check(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0,
                             const ShiftFunction& h, const FunctionalSpec& functional, int replicates,
                             std::uint64_t experiment_seed);
T2ChainReport t2_chain_check(const CoupledEnsemble& ensemble, std::size_t functional, const ShiftFunction& h,
                             const T2Constant& constant);

struct MomentLevel {
  double dt = 0.0;
  MeanEstimate sup_h_pow;   // E sup_t ||X_t||_H^p
  MeanEstimate v_energy;    // E int ||X||_V^2 dt
  std::vector<std::uint32_t> diverged;
};

struct MomentReport {
  double p = 2.0;
  MomentLevel coarse;
  MomentLevel fine;  // dt / 2
  bool finite = false;
  bool stable = false;  // each moment within a factor 2 across the refinement
};

MomentLevel moment_level(const PathEnsemble& ensemble, double p, double dt);
MomentReport moment_report(const MomentLevel& coarse, const MomentLevel& fine, double p);
/// Runs the ensemble at cfg.dt and cfg.dt / 2.
MomentReport moment_report(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0, double p,
                           int replicates, std::uint64_t experiment_seed);

// ---------------------------------------------------------------------------
// Synthetic samples for controls
// ---------------------------------------------------------------------------

std::vector<double> gaussian_samples(std::size_t n, double sigma, std::uint64_t experiment_seed);
/// Student-t with integer degrees of freedom.
std::vector<double> student_t_samples(std::size_t n, int df, std::uint64_t experiment_seed);

void to_json(nlohmann::json& j, const ExpMoment& m);
void to_json(nlohmann::json& j, const LambdaVerdict& v);
void to_json(nlohmann::json& j, const BobkovGotzeReport& r);
void to_json(nlohmann::json& j, const ExpEstimateReport& r);
void to_json(nlohmann::json& j, const TailVerdict& v);
void to_json(nlohmann::json& j, const TailReport& r);
void to_json(nlohmann::json& j, const T2ChainReport& r);
void to_json(nlohmann::json& j, const MomentLevel& m);
void to_json(nlohmann::json& j, const MomentReport& r);

}  // namespace tci
