#include "tci/noise.hpp"

#include <cmath>
#include <sstream>

#include "tci/errors.hpp"

namespace tci {

double GainClamp::lipschitz() const {
  // max |d/ds 1/(1+s^2)| = 3 sqrt(3) / 8 at s = 1/sqrt(3)
  return 3.0 * std::sqrt(3.0) / 8.0 * std::abs(g_max - g_min);
}

double NoiseOperator::lipschitz() const { return clamp ? gains.norm() * clamp->lipschitz() : 0.0; }

std::string NoiseOperator::describe() const {
  std::ostringstream os;
  os << "diagonal noise, N_W=" << truncation() << ", sum b_k^2 g_max^2=" << hs_bound();
  if (clamp) {
    os << ", multiplicative clamp g in [" << clamp->g_min << ", " << clamp->g_max << "]";
  } else {
    os << ", additive";
  }
  return os.str();
}

namespace {
void check_noise_args(int truncation, double c_b, const std::optional<GainClamp>& clamp) {
  if (truncation < 1) throw ParameterError("noise truncation N_W must be >= 1");
  if (!(c_b > 0.0)) throw ParameterError("C_B must be positive");
  if (clamp && !(clamp->g_min >= 0.0 && clamp->g_max >= clamp->g_min && clamp->g_max > 0.0)) {
    throw ParameterError("clamp must satisfy 0 <= g_min <= g_max, g_max > 0");
  }
}
}  // namespace

NoiseOperator make_inverse_k_noise(int truncation, double c_b, std::optional<GainClamp> clamp) {
  check_noise_args(truncation, c_b, clamp);
  NoiseOperator op;
  op.clamp = clamp;
  op.gains = Eigen::VectorXd::LinSpaced(truncation, 1.0, truncation).cwiseInverse();
  op.gains *= std::sqrt(c_b) / (op.gains.norm() * op.gain_max());
  return op;
}

NoiseOperator make_single_mode_noise(int truncation, double c_b, std::optional<GainClamp> clamp) {
  check_noise_args(truncation, c_b, clamp);
  NoiseOperator op;
  op.clamp = clamp;
  op.gains = Eigen::VectorXd::Zero(truncation);
  op.gains[0] = std::sqrt(c_b) / op.gain_max();
  return op;
}

Eigen::VectorXd sample_increment(const NoiseOperator& op, double dt, const SeedSpec& seed) {
  if (!(dt > 0.0)) throw ParameterError("increment time step must be positive");
  CounterStream stream(seed, StreamTag::kNoise);
  return std::sqrt(dt) * stream.normals(op.truncation());
}

double hs_norm(const NoiseOperator& op, double h_norm) { return op.gains.norm() * op.gain(h_norm); }

Eigen::VectorXd apply_noise(const NoiseOperator& op, double h_norm, const Eigen::VectorXd& w, int field_dim) {
  if (w.size() != op.truncation()) throw ParameterError("noise vector dimension does not match N_W");
  if (field_dim < op.truncation()) throw ParameterError("field has fewer modes than N_W");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(field_dim);
  out.head(op.truncation()) = op.gain(h_norm) * op.gains.cwiseProduct(w);
  return out;
}

}  // namespace tci
