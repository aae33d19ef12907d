#include "tci/solver.hpp"

#include <algorithm>
#include <cmath>

#include "tci/errors.hpp"

namespace tci {

int SolverConfig::steps() const {
  if (!(dt > 0.0) || !(T > 0.0)) throw ParameterError("dt and T must be positive");
  const double ratio = T / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw ParameterError("T/dt must be an integer number of steps");
  }
  return static_cast<int>(rounded);
}

Eigen::VectorXd step(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& v, double t,
                     const Eigen::VectorXd& dW, const Eigen::VectorXd* shift, std::size_t step_index) {
  const double dt = cfg.dt;
  const NoiseOperator& noise = model.spec().noise;
  Eigen::VectorXd rhs = v + dt * model.nonlinear(v);
  if (model.spec().forcing.size() != 0) rhs += dt * model.forcing(t);

  const double gain = noise.gain(v.norm());
  const int nw = noise.truncation();
  if (shift) {
    rhs.head(nw) += gain * noise.gains.cwiseProduct(dW + dt * *shift);
  } else {
    rhs.head(nw) += gain * noise.gains.cwiseProduct(dW);
  }
  Eigen::VectorXd out = rhs.cwiseQuotient((1.0 + dt * model.stiffness().array()).matrix());
  if (!out.allFinite()) throw DivergenceError(step_index, "non-finite state");
  return out;
}

TrajectoryRecorder::TrajectoryRecorder(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0)
    : model_(model), cfg_(cfg), steps_(cfg.steps()) {
  if (x0.size() != model.dim()) throw InvalidFieldError("initial state has the wrong dimension");
  if (!x0.allFinite()) throw InvalidFieldError("initial state has a non-finite coefficient");
  const std::size_t n = static_cast<std::size_t>(steps_) + 1;
  traj_.times.reserve(n);
  traj_.h_norms.reserve(n);
  traj_.v_norms.reserve(n);
  traj_.v_energy.reserve(n);
  traj_.sup_h_norm.reserve(n);
  record(0, x0);
}

void TrajectoryRecorder::record(int step_index, const Eigen::VectorXd& state) {
  const double h = model_.norm_h(state);
  const double v = model_.norm_v(state);
  if (step_index == 0) {
    traj_.v_energy.push_back(0.0);
    traj_.sup_h_norm.push_back(h);
  } else {
    const double prev = traj_.v_norms.back();
    traj_.v_energy.push_back(traj_.v_energy.back() + 0.5 * cfg_.dt * (prev * prev + v * v));
    traj_.sup_h_norm.push_back(std::max(traj_.sup_h_norm.back(), h));
  }
  traj_.times.push_back(step_index * cfg_.dt);
  traj_.h_norms.push_back(h);
  traj_.v_norms.push_back(v);
  const bool keep = step_index == 0 || step_index == steps_ ||
                    (cfg_.store_stride > 0 && step_index % cfg_.store_stride == 0);
  if (keep) {
    traj_.state_steps.push_back(step_index);
    traj_.states.push_back(state);
  }
}

Trajectory TrajectoryRecorder::finish(Eigen::VectorXd final_state) {
  traj_.final_state = std::move(final_state);
  return std::move(traj_);
}

Trajectory solve(const Model& model, const SolverConfig& cfg, const Eigen::VectorXd& x0, const SeedSpec& seed,
                 const ShiftFunction* shift) {
  const int steps = cfg.steps();
  if (shift && (shift->steps() != steps || shift->truncation() != model.spec().noise.truncation())) {
    throw ParameterError("shift does not match the step grid or noise truncation");
  }
  TrajectoryRecorder recorder(model, cfg, x0);
  Eigen::VectorXd state = x0;
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd dW =
        sample_increment(model.spec().noise, cfg.dt, {seed.experiment_seed, seed.replicate, static_cast<std::uint32_t>(k)});
    state = step(model, cfg, state, k * cfg.dt, dW, shift ? &shift->at_step(k) : nullptr, static_cast<std::size_t>(k));
    recorder.record(k + 1, state);
  }
  return recorder.finish(std::move(state));
}

}  // namespace tci
