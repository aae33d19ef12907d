#include "tci/constants.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tci/errors.hpp"

namespace tci {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// (u, v) -> (e1, e2) with e2 = logistic(u), e1 = (1 - e2) logistic(v). Every
// finite (u, v) lands strictly inside the feasible triangle.
struct Point {
  double eps1;
  double eps2;
};

Point from_logits(double u, double v) {
  const double e2 = logistic(u);
  return {(1.0 - e2) * logistic(v), e2};
}

void check_query(const T2ConstantQuery& q) {
  if (!(q.T > 0.0)) throw ParameterError("T must be positive");
  if (!(q.C_B > 0.0)) throw ParameterError("C_B must be positive");
  if (!(q.C1 > 0.0)) throw ParameterError("C1 must be positive");
  if (!std::isfinite(q.K2)) throw ParameterError("K2 must be finite");
}

// Golden-section minimisation of a unimodal function on [lo, hi].
template <class Fn>
double golden_min(Fn&& fn, double lo, double hi, int iterations) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = fn(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace

double t2_objective(const T2ConstantQuery& q, double eps1, double eps2) {
  const double rest = 1.0 - eps1 - eps2;
  const double k2 = std::max(q.K2, 0.0);
  const double exponent = (eps2 + q.C1 * q.C1) * k2 * q.T / (rest * eps2);
  return q.C_B / (eps1 * rest) * std::exp(exponent);
}

T2Constant t2_constant(const T2ConstantQuery& q) {
  check_query(q);
  T2Constant out;
  out.clamped = q.K2 < 0.0;
  if (q.K2 <= 0.0) {
    // Exponent vanishes; inf of C_B / (e1 (1 - e1 - e2)) is approached as
    // e2 -> 0 at e1 = 1/2. The representative e2 is below double resolution
    // of 1 - e1 - e2, so the objective evaluates to exactly 4 C_B.
    out.eps1 = 0.5;
    out.eps2 = 1e-300;
    out.value = t2_objective(q, out.eps1, out.eps2);
    return out;
  }

  // Work with log of the objective to keep the exponential factor tame.
  auto log_objective = [&q](double u, double v) {
    const Point p = from_logits(u, v);
    const double rest = 1.0 - p.eps1 - p.eps2;
    return std::log(q.C_B) - std::log(p.eps1) - std::log(rest) +
           (p.eps2 + q.C1 * q.C1) * q.K2 * q.T / (rest * p.eps2);
  };

  constexpr int kGrid = 200;
  constexpr double kRange = 30.0;
  const double spacing = 2.0 * kRange / (kGrid - 1);
  double best = std::numeric_limits<double>::infinity();
  double best_u = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double u = -kRange + i * spacing;
    for (int j = 0; j < kGrid; ++j) {
      const double v = -kRange + j * spacing;
      const double f = log_objective(u, v);
      if (f < best) {
        best = f;
        best_u = u;
      }
    }
  }

  // For fixed e2 the objective is convex in e1, hence unimodal in v.
  auto inner_v = [&](double u) {
    return golden_min([&](double v) { return log_objective(u, v); }, -40.0, 40.0, 120);
  };
  const double u_star = golden_min([&](double u) { return log_objective(u, inner_v(u)); },
                                   best_u - 2.0 * spacing, best_u + 2.0 * spacing, 120);
  const double v_star = inner_v(u_star);

  const Point p = from_logits(u_star, v_star);
  out.eps1 = p.eps1;
  out.eps2 = p.eps2;
  out.value = t2_objective(q, p.eps1, p.eps2);
  return out;
}

double t1_constant(const T1ConstantQuery& q) {
  if (!(q.theta > 0.0)) throw ParameterError("theta must be positive");
  if (!(q.c > 0.0 && q.c < q.c_max)) {
    throw ParameterError("c = " + std::to_string(q.c) + " outside (0, " + std::to_string(q.c_max) + ")");
  }
  if (!(q.lambda0 > 0.0 && q.lambda0 < q.lambda0_max)) {
    throw ParameterError("lambda0 = " + std::to_string(q.lambda0) + " outside (0, " +
                         std::to_string(q.lambda0_max) + ")");
  }
  if (!(q.mu_moment >= 1.0) || !std::isfinite(q.mu_moment)) {
    throw ParameterError("mu_moment must be finite and >= 1");
  }
  if (!(q.f_tilde_integral >= 0.0) || !std::isfinite(q.f_tilde_integral)) {
    throw ParameterError("f_tilde_integral must be finite and >= 0");
  }
  return std::exp(2.0 * q.lambda0 * q.f_tilde_integral + 1.0) /
         (q.c * q.lambda0 * q.theta * std::sqrt(std::numbers::pi)) * q.mu_moment * q.mu_moment;
}

double ccr_constant(double a, double b) {
  if (!(a > 0.0)) throw ParameterError("Gaussian moment exponent a must be positive");
  if (!(b >= 1.0)) throw ParameterError("Gaussian moment bound b must be >= 1");
  return b * b * std::numbers::e / (2.0 * a * std::sqrt(std::numbers::pi));
}

GaussianMomentPair gaussian_moment_pair(double c, double lambda0, double theta, double f_tilde_integral,
                                        double x0_h_norm_sq) {
  if (!(c > 0.0 && c < 1.0)) throw ParameterError("c outside (0, 1)");
  if (!(lambda0 >= 0.0)) throw ParameterError("lambda0 must be nonnegative");
  if (!(theta > 0.0)) throw ParameterError("theta must be positive");
  if (!(f_tilde_integral >= 0.0) || !(x0_h_norm_sq >= 0.0)) {
    throw ParameterError("f_tilde_integral and ||x0||^2 must be nonnegative");
  }
  return {c * lambda0 * theta, std::exp(lambda0 * (f_tilde_integral + x0_h_norm_sq))};
}

AdmissibleRanges admissible_ranges(double theta, double eta, double K3, double C_B, double c) {
  const double theta_eta = theta * eta;
  if (!(theta_eta - K3 > 0.0)) {
    throw InfeasibleError("theta eta - K3 = " + std::to_string(theta_eta - K3) + " is not positive");
  }
  if (!(C_B > 0.0)) throw ParameterError("C_B must be positive");
  AdmissibleRanges r;
  r.c_max = 1.0 - K3 / theta_eta;
  if (!(c > 0.0 && c < r.c_max)) {
    throw ParameterError("c = " + std::to_string(c) + " outside (0, " + std::to_string(r.c_max) + ")");
  }
  const double numerator = (1.0 - c) * theta_eta - K3;
  r.lambda0_max_lemma = numerator / (2.0 * C_B + theta_eta);
  r.lambda0_max_theorem = numerator / (2.0 * C_B);
  return r;
}

void to_json(nlohmann::json& j, const T2Constant& r) {
  j = nlohmann::json{{"value", r.value}, {"argmin", {r.eps1, r.eps2}}, {"K2_clamped", r.clamped}};
}

void to_json(nlohmann::json& j, const AdmissibleRanges& r) {
  j = nlohmann::json{{"c_max", r.c_max},
                     {"lambda0_max_lemma", r.lambda0_max_lemma},
                     {"lambda0_max_theorem", r.lambda0_max_theorem}};
}

}  // namespace tci
