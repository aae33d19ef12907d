#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "tci/problem.hpp"
#include "tci/rng.hpp"
#include "tci/shift.hpp"

namespace tci {

struct SolverConfig {
  double dt = 1e-3;
  double T = 1.0;
  Resolution resolution;
  /// Keep every store_stride-th state; 0 keeps only the initial and final state.
  int store_stride = 1;

  /// Number of steps T/dt; throws ParameterError if T/dt is not an integer.
  int steps() const;
};

/// Time-discretised solution path. Scalar diagnostics are recorded at every
/// grid point; full states according to SolverConfig::store_stride.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> h_norms;
  std::vector<double> v_norms;
  std::vector<double> v_energy;     // running trapezoid of ||X_s||_V^2
  std::vector<double> sup_h_norm;   // running max of ||X_s||_H
  std::vector<int> state_steps;
  std::vector<Eigen::VectorXd> states;
  Eigen::VectorXd final_state;

  double total_v_energy() const { return v_energy.back(); }
  double max_h_norm() const { return sup_h_norm.back(); }
};

/// One semi-implicit Euler-Maruyama step: the linear part is implicit per
/// mode, nonlinearity, forcing, noise and the shift term B(v) h dt explicit.
/// `step_index` is only used to label a DivergenceError.
Eigen::VectorXd step(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& v, double t,
                     const Eigen::VectorXd& dW, const Eigen::VectorXd* shift, std::size_t step_index = 0);

/// Advances x0 over [0, T]. Increment k is drawn from the stream
/// (seed.experiment_seed, seed.replicate, k).
Trajectory solve(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0, const SeedSpec& seed,
                 const ShiftFunction* shift = nullptr);

/// Records diagnostics of a state into a trajectory under construction.
class TrajectoryRecorder {
 public:
  TrajectoryRecorder(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0);
  void record(int step_index, const Eigen::VectorXd& state);
  Trajectory finish(Eigen::VectorXd final_state);

 private:
  const Model& model_;
  SolverConfig cfg_;
  int steps_;
  Trajectory traj_;
};

}  // namespace tci
