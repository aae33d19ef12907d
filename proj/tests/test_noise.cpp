#include <cmath>

#include "doctest.h"
#include "tci/errors.hpp"
#include "tci/noise.hpp"

using namespace tci;
using doctest::Approx;

TEST_CASE("operator construction") {
  const NoiseOperator k = make_inverse_k_noise(8, 2.0);
  CHECK(k.truncation() == 8);
  CHECK(k.hs_bound() == Approx(2.0).epsilon(1e-14));
  CHECK(k.gains[1] == Approx(k.gains[0] / 2.0));
  const NoiseOperator s = make_single_mode_noise(8, 1.0, GainClamp{0.5, 2.0});
  CHECK(s.gains[0] == Approx(0.5));
  CHECK(s.gains.tail(7).norm() == 0.0);
  CHECK(s.hs_bound() == Approx(1.0));
  CHECK_THROWS_AS(make_inverse_k_noise(0, 1.0), ParameterError);
  CHECK_THROWS_AS(make_inverse_k_noise(4, 0.0), ParameterError);
  CHECK_THROWS_AS(make_inverse_k_noise(4, 1.0, GainClamp{1.0, 0.5}), ParameterError);
}

TEST_CASE("gain clamp") {
  const GainClamp g{0.5, 1.0};
  CHECK(g(0.0) == 1.0);
  CHECK(g(1e8) == Approx(0.5));
  // Lipschitz constant of 1/(1+s^2) is 3 sqrt(3)/8.
  CHECK(g.lipschitz() == Approx(3.0 * std::sqrt(3.0) / 8.0 * 0.5));
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double s = i * 1e-3;
    worst = std::max(worst, std::abs(g(s + 1e-6) - g(s)) / 1e-6);
  }
  CHECK(worst <= g.lipschitz() * (1.0 + 1e-4));
}

TEST_CASE("hs_norm examples") {
  NoiseOperator single;
  single.gains = Eigen::VectorXd::Zero(4);
  single.gains[0] = 1.0;
  CHECK(hs_norm(single, 0.0) == 1.0);
  CHECK(hs_norm(single, 17.0) == 1.0);
  NoiseOperator two;
  two.gains = Eigen::VectorXd::Ones(2);
  CHECK(hs_norm(two, 3.0) == Approx(std::sqrt(2.0)));

  const double c_b = 0.7;
  const NoiseOperator clamped = make_inverse_k_noise(8, c_b, GainClamp{0.5, 1.0});
  int violations = 0;
  CounterStream s({1, 0, 0}, StreamTag::kAudit);
  for (int i = 0; i < 1000; ++i) {
    const double h = std::exp(4.0 * s.uniform() - 2.0);
    if (hs_norm(clamped, h) > std::sqrt(c_b) * (1.0 + 1e-15)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("sample_increment") {
  const NoiseOperator op = make_inverse_k_noise(4, 1.0);
  CHECK_THROWS_AS(sample_increment(op, 0.0, {1, 0, 0}), ParameterError);
  CHECK_THROWS_AS(sample_increment(op, -1.0, {1, 0, 0}), ParameterError);

  const Eigen::VectorXd a = sample_increment(op, 0.01, {7, 3, 5});
  const Eigen::VectorXd b = sample_increment(op, 0.01, {7, 3, 5});
  CHECK(a.size() == 4);
  CHECK((a - b).norm() == 0.0);
  CHECK((a - sample_increment(op, 0.01, {7, 3, 6})).norm() > 0.0);

  for (double dt : {1e-2, 1e-4}) {
    const int n = 100000;
    double sum_sq = 0.0;
    double sum_4 = 0.0;
    for (int i = 0; i < n / 4; ++i) {
      const Eigen::VectorXd w = sample_increment(op, dt, {11, static_cast<std::uint32_t>(i), 0});
      sum_sq += w.squaredNorm();
      sum_4 += w.array().pow(4).sum();
    }
    const double var = sum_sq / n;
    const double se = std::sqrt((sum_4 / n - var * var) / n);
    CHECK(std::abs(var - dt) <= 3.0 * se);
  }

  const int pairs = 10000;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const auto r = static_cast<std::uint32_t>(i);
    const double x = sample_increment(op, 1.0, {21, r, 0})[0];
    const double y = sample_increment(op, 1.0, {22, r, 0})[0];
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  CHECK(std::abs(sxy / std::sqrt(sxx * syy)) < 0.05);
}

TEST_CASE("apply_noise") {
  NoiseOperator op;
  op.gains = Eigen::Vector3d(0.5, 0.25, 0.125);
  const Eigen::VectorXd zero = apply_noise(op, 1.0, Eigen::VectorXd::Zero(3), 6);
  CHECK(zero.size() == 6);
  CHECK(zero.norm() == 0.0);
  const Eigen::VectorXd e1 = apply_noise(op, 1.0, Eigen::Vector3d(1, 0, 0), 6);
  CHECK(e1[0] == 0.5);
  CHECK(e1.tail(5).norm() == 0.0);
  const Eigen::Vector3d u(1, -2, 3), v(0.5, 4, -1);
  const Eigen::VectorXd lhs = apply_noise(op, 0.3, 2.0 * u + v, 6);
  const Eigen::VectorXd rhs = 2.0 * apply_noise(op, 0.3, u, 6) + apply_noise(op, 0.3, v, 6);
  CHECK((lhs - rhs).norm() <= 1e-15);
  CHECK_THROWS_AS(apply_noise(op, 1.0, Eigen::VectorXd::Zero(2), 6), ParameterError);
  CHECK_THROWS_AS(apply_noise(op, 1.0, Eigen::VectorXd::Zero(3), 2), ParameterError);

  op.clamp = GainClamp{0.5, 1.0};
  const Eigen::VectorXd g = apply_noise(op, 1.0, Eigen::Vector3d(1, 0, 0), 3);
  CHECK(g[0] == Approx(0.5 * 0.75));
}
