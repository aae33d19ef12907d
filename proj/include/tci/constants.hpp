#pragma once

#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace tci {

// ---------------------------------------------------------------------------
// Quadratic transportation constant for monotone drifts:
//
//   C(T, K2, C_B) = inf_{e1, e2 > 0, e1 + e2 < 1}
//       C_B / (e1 (1 - e1 - e2)) * exp((e2 + C1^2) K2 T / ((1 - e1 - e2) e2))
//
// K2 enters as max(K2, 0): for K2 < 0 the literal infimum collapses to 0 as
// e2 -> 0, which is not a valid constant.
// ---------------------------------------------------------------------------

struct T2ConstantQuery {
  double T = 1.0;
  double K2 = 0.0;
  double C_B = 1.0;
  double C1 = 2.0;
};

struct T2Constant {
  double value = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  bool clamped = false;  // K2 < 0 was replaced by 0
};

/// Objective of the infimum at (eps1, eps2), with the K2 clamp applied.
double t2_objective(const T2ConstantQuery& q, double eps1, double eps2);

/// Deterministic 200 x 200 logit grid followed by nested golden-section
/// refinement. K2 <= 0 is solved in closed form (4 C_B at e1 = 1/2, e2 -> 0).
T2Constant t2_constant(const T2ConstantQuery& q);

// ---------------------------------------------------------------------------
// T1 constant on L2([0,T]; V)
//
//   C = exp(2 lambda0 int f_tilde + 1) / (c lambda0 theta sqrt(pi)) * M^2
//
// with M = int_H exp(lambda0 ||x||_H^2) mu(dx) >= 1.
// ---------------------------------------------------------------------------

struct T1ConstantQuery {
  double lambda0 = 0.0;
  double c = 0.5;
  double theta = 1.0;
  double f_tilde_integral = 0.0;
  double mu_moment = 1.0;
  /// Admissible ranges; the defaults only enforce positivity.
  double c_max = 1.0;
  double lambda0_max = std::numeric_limits<double>::infinity();
};

/// Throws ParameterError naming the violated range.
double t1_constant(const T1ConstantQuery& q);

/// Gaussian concentration constant D = b^2 e / (2 a sqrt(pi)) of a measure
/// with Gaussian moment int exp(a d(x0, x)^2) dmu <= b.
double ccr_constant(double a, double b);

struct GaussianMomentPair {
  double a = 0.0;
  double b = 1.0;
};

/// a = c lambda0 theta, b = exp(lambda0 (int f_tilde + ||x0||_H^2)).
GaussianMomentPair gaussian_moment_pair(double c, double lambda0, double theta, double f_tilde_integral,
                                        double x0_h_norm_sq);

/// The exponential estimate needs lambda0 < ((1-c) theta eta - K3) / (2 C_B + theta eta);
/// the T1 theorem is stated for lambda0 < ((1-c) theta eta - K3) / (2 C_B).
/// Both are reported; callers default to the smaller.
struct AdmissibleRanges {
  double c_max = 0.0;
  double lambda0_max_lemma = 0.0;
  double lambda0_max_theorem = 0.0;
};

/// Throws InfeasibleError when theta eta - K3 <= 0.
AdmissibleRanges admissible_ranges(double theta, double eta, double K3, double C_B, double c);

void to_json(nlohmann::json& j, const T2Constant& r);
void to_json(nlohmann::json& j, const AdmissibleRanges& r);

}  // namespace tci
