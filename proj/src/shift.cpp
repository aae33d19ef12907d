#include "tci/shift.hpp"

#include <cmath>

#include "tci/errors.hpp"

namespace tci {

ShiftFunction::ShiftFunction(double dt, std::vector<Eigen::VectorXd> values)
    : dt_(dt), values_(std::move(values)) {
  if (!(dt > 0.0)) throw ParameterError("shift time step must be positive");
  for (const auto& v : values_) {
    if (v.size() != truncation()) throw ParameterError("shift values have inconsistent dimension");
    if (!v.allFinite()) throw ParameterError("shift has a non-finite value");
  }
}

namespace {
void check_mode(int truncation, int mode) {
  if (truncation < 1) throw ParameterError("shift truncation must be >= 1");
  if (mode < 1 || mode > truncation) throw ParameterError("shift mode index out of range");
}
}  // namespace

ShiftFunction ShiftFunction::mode(int truncation, int mode, double amplitude, double dt, int steps) {
  check_mode(truncation, mode);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(truncation);
  h[mode - 1] = amplitude;
  return ShiftFunction(dt, std::vector<Eigen::VectorXd>(steps, h));
}

ShiftFunction ShiftFunction::constant(int truncation, double amplitude, double dt, int steps) {
  check_mode(truncation, 1);
  const Eigen::VectorXd h = Eigen::VectorXd::Constant(truncation, amplitude / std::sqrt(double(truncation)));
  return ShiftFunction(dt, std::vector<Eigen::VectorXd>(steps, h));
}

ShiftFunction ShiftFunction::ramp(int truncation, int mode, double amplitude, double dt, int steps) {
  check_mode(truncation, mode);
  std::vector<Eigen::VectorXd> values(steps, Eigen::VectorXd::Zero(truncation));
  for (int k = 0; k < steps; ++k) values[k][mode - 1] = amplitude * (k + 0.5) * dt;
  return ShiftFunction(dt, std::move(values));
}

ShiftFunction ShiftFunction::zero(int truncation, double dt, int steps) {
  check_mode(truncation, 1);
  return ShiftFunction(dt, std::vector<Eigen::VectorXd>(steps, Eigen::VectorXd::Zero(truncation)));
}

double ShiftFunction::energy() const {
  double sum = 0.0;
  for (const auto& v : values_) sum += v.squaredNorm();
  return sum * dt_;
}

bool ShiftFunction::is_zero() const {
  for (const auto& v : values_) {
    if (!v.isZero(0.0)) return false;
  }
  return true;
}

}  // namespace tci
