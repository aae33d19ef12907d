#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tci/rng.hpp"

namespace tci {

/// Bounded scalar gain g(s) = g_min + (g_max - g_min) / (1 + s^2) of the
/// state's H-norm s. Lipschitz with constant 3 sqrt(3) / 8 (g_max - g_min).
struct GainClamp {
  double g_min = 1.0;
  double g_max = 1.0;

  double operator()(double h_norm) const { return g_min + (g_max - g_min) / (1.0 + h_norm * h_norm); }
  double lipschitz() const;
};

/// Diagonal Hilbert-Schmidt operator B(v) w = g(||v||_H) sum_k b_k w_k phi_k
/// from the truncated mode space U = R^{N_W} into the field's modal basis.
struct NoiseOperator {
  Eigen::VectorXd gains;
  std::optional<GainClamp> clamp;

  int truncation() const { return static_cast<int>(gains.size()); }
  double gain_max() const { return clamp ? clamp->g_max : 1.0; }
  double gain(double h_norm) const { return clamp ? (*clamp)(h_norm) : 1.0; }
  /// sum_k b_k^2 g_max^2, the HS bound realised by this operator.
  double hs_bound() const { return gains.squaredNorm() * gain_max() * gain_max(); }
  /// Lipschitz constant of v -> B(v) in L2(U;H).
  double lipschitz() const;
  std::string describe() const;
};

/// Gains b_k proportional to k^-1, scaled so sum b_k^2 g_max^2 = C_B.
NoiseOperator make_inverse_k_noise(int truncation, double c_b, std::optional<GainClamp> clamp = std::nullopt);
/// Single-mode noise b = (sqrt(C_B)/g_max, 0, ..., 0).
NoiseOperator make_single_mode_noise(int truncation, double c_b, std::optional<GainClamp> clamp = std::nullopt);

/// N_W independent N(0, dt) draws for the stream identified by `seed`.
Eigen::VectorXd sample_increment(const NoiseOperator& op, double dt, const SeedSpec& seed);

/// ||B(v)||_{L2(U;H)} for a state with H-norm `h_norm`.
double hs_norm(const NoiseOperator& op, double h_norm);

/// Modal coefficients of B(v) w, padded with zeros to `field_dim`.
Eigen::VectorXd apply_noise(const NoiseOperator& op, double h_norm, const Eigen::VectorXd& w, int field_dim);

}  // namespace tci
