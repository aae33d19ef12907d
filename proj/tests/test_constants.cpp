#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tci/constants.hpp"
#include "tci/errors.hpp"
#include "tci/rng.hpp"

using namespace tci;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Dense uniform grid over the simplex followed by two 10x zooms.
double grid_oracle(const T2ConstantQuery& q, int n) {
  double lo1 = 0.0, hi1 = 1.0, lo2 = 0.0, hi2 = 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (int zoom = 0; zoom < 3; ++zoom) {
    double b1 = 0.5, b2 = 0.25;
    for (int i = 1; i < n; ++i) {
      const double e1 = lo1 + (hi1 - lo1) * i / n;
      for (int j = 1; j < n; ++j) {
        const double e2 = lo2 + (hi2 - lo2) * j / n;
        if (e1 <= 0.0 || e2 <= 0.0 || e1 + e2 >= 1.0) continue;
        const double v = t2_objective(q, e1, e2);
        if (v < best) {
          best = v;
          b1 = e1;
          b2 = e2;
        }
      }
    }
    const double w1 = 2.0 * (hi1 - lo1) / n;
    const double w2 = 2.0 * (hi2 - lo2) / n;
    lo1 = std::max(0.0, b1 - w1);
    hi1 = std::min(1.0, b1 + w1);
    lo2 = std::max(0.0, b2 - w2);
    hi2 = std::min(1.0, b2 + w2);
  }
  return best;
}

}  // namespace

TEST_CASE("T2 constant at K2 = 0") {
  for (double T : {0.1, 1.0, 10.0}) {
    for (double C1 : {0.5, 2.0}) {
      const T2Constant c = t2_constant({T, 0.0, 1.0, C1});
      CHECK(c.value == Approx(4.0).epsilon(1e-4));
      CHECK_FALSE(c.clamped);
    }
  }
  CHECK(t2_constant({1.0, 0.0, 2.5, 2.0}).value == Approx(10.0).epsilon(1e-4));
  const T2Constant neg = t2_constant({1.0, -3.0, 1.0, 2.0});
  CHECK(neg.clamped);
  CHECK(neg.value == Approx(4.0).epsilon(1e-4));
}

TEST_CASE("T2 constant against a grid oracle") {
  const T2ConstantQuery q{1.0, 1.0, 1.0, 2.0};
  const auto start = std::chrono::steady_clock::now();
  const T2Constant c = t2_constant(q);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 10.0);
  const double oracle = grid_oracle(q, 1000);
  CHECK(c.value <= oracle * (1.0 + 1e-6));
  CHECK(c.value == Approx(oracle).epsilon(1e-6));
}

TEST_CASE("T2 argmin reproduces the value") {
  CounterStream s({2024, 0, 0}, StreamTag::kSynthetic);
  for (int i = 0; i < 20; ++i) {
    const T2ConstantQuery q{0.1 + 2.0 * s.uniform(), 2.0 * s.uniform(), 0.1 + 2.0 * s.uniform(),
                            0.5 + 2.0 * s.uniform()};
    const T2Constant c = t2_constant(q);
    CHECK(c.eps1 > 0.0);
    CHECK(c.eps2 > 0.0);
    CHECK(c.eps1 + c.eps2 < 1.0);
    CHECK(std::abs(t2_objective(q, c.eps1, c.eps2) - c.value) <= 1e-12 * c.value);
  }
}

TEST_CASE("T2 constant is monotone") {
  CounterStream s({7, 0, 0}, StreamTag::kSynthetic);
  for (int i = 0; i < 20; ++i) {
    const T2ConstantQuery q{0.2 + s.uniform(), s.uniform(), 0.2 + s.uniform(), 2.0};
    const double base = t2_constant(q).value;
    T2ConstantQuery up = q;
    up.T *= 1.5;
    CHECK(t2_constant(up).value >= base * (1.0 - 1e-9));
    up = q;
    up.C_B *= 1.5;
    CHECK(t2_constant(up).value >= base * (1.0 - 1e-9));
    up = q;
    up.K2 += 0.5;
    CHECK(t2_constant(up).value >= base * (1.0 - 1e-9));
  }
}

TEST_CASE("T2 constant errors") {
  CHECK_THROWS_AS(t2_constant({0.0, 1.0, 1.0, 2.0}), ParameterError);
  CHECK_THROWS_AS(t2_constant({1.0, 1.0, 0.0, 2.0}), ParameterError);
  CHECK_THROWS_AS(t2_constant({1.0, 1.0, 1.0, -1.0}), ParameterError);
  const nlohmann::json j = t2_constant({1.0, 0.0, 1.0, 2.0});
  CHECK(j.at("value") == 4.0);
  CHECK(j.contains("argmin"));
}

TEST_CASE("T1 constant") {
  T1ConstantQuery q;
  q.lambda0 = 1.0;
  q.c = 0.5;
  q.theta = 1.5;
  q.f_tilde_integral = 0.0;
  q.mu_moment = 1.0;
  CHECK(t1_constant(q) == Approx(std::exp(1.0) / (0.75 * std::sqrt(kPi))).epsilon(1e-14));
  CHECK(t1_constant(q) == Approx(2.0449).epsilon(1e-4));
  T1ConstantQuery doubled = q;
  doubled.mu_moment = 2.0;
  CHECK(t1_constant(doubled) == 4.0 * t1_constant(q));

  q.lambda0 = 0.3;
  q.f_tilde_integral = 1.0;
  CHECK(t1_constant(q) == Approx(std::exp(1.6) / (0.225 * std::sqrt(kPi))).epsilon(1e-14));
  CHECK(t1_constant(q) == Approx(12.414).epsilon(1e-3));

  // Strictly decreasing in c.
  double prev = std::numeric_limits<double>::infinity();
  for (double c = 0.05; c < 1.0; c += 0.05) {
    T1ConstantQuery qc = q;
    qc.c = c;
    const double v = t1_constant(qc);
    CHECK(v < prev);
    prev = v;
  }

  // Unique interior minimum in lambda0 when f_tilde_integral > 0.
  q.lambda0_max = 2.0;
  int local_minima = 0;
  std::vector<double> vals;
  for (int i = 1; i < 400; ++i) {
    T1ConstantQuery ql = q;
    ql.lambda0 = 2.0 * i / 400.0;
    vals.push_back(t1_constant(ql));
  }
  for (std::size_t i = 1; i + 1 < vals.size(); ++i) {
    if (vals[i] < vals[i - 1] && vals[i] < vals[i + 1]) ++local_minima;
  }
  CHECK(local_minima == 1);

  T1ConstantQuery bad = q;
  bad.lambda0 = 0.0;
  CHECK_THROWS_AS(t1_constant(bad), ParameterError);
  bad = q;
  bad.c = 1.0;
  CHECK_THROWS_AS(t1_constant(bad), ParameterError);
  bad = q;
  bad.mu_moment = 0.5;
  CHECK_THROWS_AS(t1_constant(bad), ParameterError);
  bad = q;
  bad.lambda0 = 3.0;
  CHECK_THROWS_AS(t1_constant(bad), ParameterError);
}

TEST_CASE("CCR constant") {
  CHECK(ccr_constant(1.0, 1.0) == Approx(std::exp(1.0) / (2.0 * std::sqrt(kPi))).epsilon(1e-14));
  CHECK(ccr_constant(1.0, 1.0) == Approx(0.76684).epsilon(1e-3));
  CHECK(ccr_constant(0.5, 1.0) == Approx(1.53368).epsilon(1e-3));
  CHECK(ccr_constant(1.0, 2.0) == Approx(3.06737).epsilon(1e-3));
  for (double a : {0.1, 0.7, 3.0, 20.0}) CHECK(ccr_constant(a, 1.7) * a == Approx(ccr_constant(1.0, 1.7)));
  CHECK_THROWS_AS(ccr_constant(1.0, 0.9), ParameterError);
  CHECK_THROWS_AS(ccr_constant(0.0, 1.0), ParameterError);
}

TEST_CASE("Gaussian moment pair") {
  const GaussianMomentPair tiny = gaussian_moment_pair(0.5, 1e-12, 1.5, 1.0, 0.0);
  CHECK(tiny.a == Approx(0.0).epsilon(1e-10));
  CHECK(tiny.b == Approx(1.0));
  CHECK(gaussian_moment_pair(0.5, 0.3, 1.5, 0.0, 0.0).a == Approx(0.225).epsilon(1e-14));
  CHECK(gaussian_moment_pair(0.5, 0.3, 1.5, 1.0, 0.0).b == Approx(std::exp(0.3)).epsilon(1e-14));
  CHECK(gaussian_moment_pair(0.5, 0.3, 1.5, 1.0, 0.0).b == Approx(1.34986).epsilon(1e-5));
}

TEST_CASE("admissible ranges") {
  const double eta = std::sqrt(kPi * kPi - 1.0);
  const AdmissibleRanges r = admissible_ranges(1.5, eta, 0.0, 1.0, 0.5);
  CHECK(r.c_max == 1.0);
  CHECK(r.lambda0_max_lemma == Approx(0.75 * eta / (2.0 + 1.5 * eta)).epsilon(1e-14));
  CHECK(r.lambda0_max_lemma == Approx(0.34538).epsilon(1e-4));
  CHECK(r.lambda0_max_theorem == Approx(0.75 * eta / 2.0).epsilon(1e-14));
  CHECK(r.lambda0_max_theorem == Approx(1.11680).epsilon(1e-4));

  const double eta2 = std::sqrt(2.0 * kPi * kPi - 1.0);
  const AdmissibleRanges ns = admissible_ranges(0.1, eta2, 0.0, 0.01, 0.5);
  CHECK(ns.lambda0_max_theorem == Approx(0.5 * 0.1 * eta2 / 0.02).epsilon(1e-14));
  CHECK(ns.lambda0_max_theorem == Approx(10.827).epsilon(1e-3));

  CHECK_THROWS_AS(admissible_ranges(1.0, 1.0, 2.0, 1.0, 0.5), InfeasibleError);
  CHECK_THROWS_AS(admissible_ranges(1.0, 1.0, 0.5, 1.0, 0.6), ParameterError);
}
