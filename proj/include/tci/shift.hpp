#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace tci {

/// Deterministic drift shift h: [0,T] -> U, piecewise constant on the step
/// grid. values[k] is the value on [t_k, t_{k+1}); continuous profiles are
/// sampled at interval midpoints.
class ShiftFunction {
 public:
  ShiftFunction() = default;
  ShiftFunction(double dt, std::vector<Eigen::VectorXd> values);

  /// h(t) = amplitude e_mode for all t (mode is 1-based).
  static ShiftFunction mode(int truncation, int mode, double amplitude, double dt, int steps);
  /// h(t) = amplitude (1, ..., 1) / sqrt(N_W), so ||h||_U = amplitude.
  static ShiftFunction constant(int truncation, double amplitude, double dt, int steps);
  /// h(t) = amplitude t e_mode.
  static ShiftFunction ramp(int truncation, int mode, double amplitude, double dt, int steps);
  static ShiftFunction zero(int truncation, double dt, int steps);

  int steps() const { return static_cast<int>(values_.size()); }
  int truncation() const { return values_.empty() ? 0 : static_cast<int>(values_.front().size()); }
  double dt() const { return dt_; }
  const Eigen::VectorXd& at_step(int k) const { return values_[k]; }
  /// Integral of ||h(s)||_U^2 over [0, T]; exact for the piecewise-constant h.
  double energy() const;
  bool is_zero() const;

 private:
  double dt_ = 0.0;
  std::vector<Eigen::VectorXd> values_;
};

/// 1/2 integral ||h||_U^2 ds = H(Q | P) for the Girsanov measure of h.
inline double shift_entropy(const ShiftFunction& h) { return 0.5 * h.energy(); }

}  // namespace tci
