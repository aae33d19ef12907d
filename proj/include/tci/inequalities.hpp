#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace tci {

/// Outcome of one property checked on seeded random fields. `worst` is the
/// largest normalised defect seen; a sample violates when worst > tolerance.
struct SuiteResult {
  std::string name;
  int samples = 0;
  int violations = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  std::uint32_t witness = 0;  // replicate index of the worst sample
  bool pass() const { return violations == 0; }
};

struct InequalityReport {
  std::vector<SuiteResult> suites;
  bool all_pass() const;
  const SuiteResult* find(const std::string& name) const;
};

/// Runs on `n_samples` random fields per suite:
///   l4_interpolation_1d   ||v||_L4^4 / (4 ||v||^2 ||v_x||^2)  <= 1
///   poincare_interval     eta - ||v||_V^2 / ||v||_H^2         <= 0, eta = sqrt(pi^2 - 1)
///   poincare_torus        same with eta = sqrt(2 pi^2 - 1)
///   parseval_1d/2d        |spectral - quadrature H-norm| / max(1, norm)  <= 1e-12
///   burgers_skew          |<v v_x, v>| / max(1, ||v v_x|| ||v||)        <= 1e-10
///   ns_skew               |<P(u.grad)u, u>| / max(1, ...)               <= 1e-10
///   taylor_green          ||P(u.grad)u|| for scaled Taylor-Green fields <= 1e-10
InequalityReport inequality_suite(int n_samples, std::uint64_t seed, int n_modes, int cutoff);

void to_json(nlohmann::json& j, const SuiteResult& r);
void to_json(nlohmann::json& j, const InequalityReport& r);

}  // namespace tci
