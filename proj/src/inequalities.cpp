#include "tci/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tci/noise.hpp"
#include "tci/problem.hpp"
#include "tci/spaces.hpp"

namespace tci {

namespace {

SuiteResult run_suite(const std::string& name, int n, double tolerance,
                      const std::function<double(std::uint32_t)>& defect) {
  SuiteResult r;
  r.name = name;
  r.tolerance = tolerance;
  r.worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const auto rep = static_cast<std::uint32_t>(i);
    const double d = defect(rep);
    ++r.samples;
    if (!(d <= tolerance)) ++r.violations;
    if (!(d <= r.worst)) {
      r.worst = d;
      r.witness = rep;
    }
  }
  return r;
}

}  // namespace

bool InequalityReport::all_pass() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.pass(); });
}

const SuiteResult* InequalityReport::find(const std::string& name) const {
  for (const auto& s : suites) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

InequalityReport inequality_suite(int n_samples, std::uint64_t seed, int n_modes, int cutoff) {
  const NoiseOperator noise = make_inverse_k_noise(1, 1.0);
  const Model line(make_burgers(noise), Resolution{n_modes, cutoff, true, 0});
  const Model torus(make_navier_stokes(noise, 1.0), Resolution{n_modes, cutoff, true, 0});
  const Quadrature q1 = default_quadrature(n_modes);
  const Quadrature q2 = default_quadrature_2d(cutoff);
  auto field1 = [&](std::uint32_t r) { return random_state(line, {seed, r, 0}); };
  auto field2 = [&](std::uint32_t r) { return random_state(torus, {seed, r, 0}); };

  InequalityReport rep;
  rep.suites.push_back(run_suite("l4_interpolation_1d", n_samples, 1.0, [&](std::uint32_t r) {
    const Field1D v(field1(r));
    const double l4 = norm_l4(v, q1);
    const double h = norm_h(v);
    const double dv = norm_v(v);
    return (l4 * l4 * l4 * l4) / (4.0 * h * h * dv * dv);
  }));
  rep.suites.push_back(run_suite("poincare_interval", n_samples, 0.0, [&](std::uint32_t r) {
    const Field1D v(field1(r));
    return eta_interval() - poincare_audit(v, eta_interval()).ratio;
  }));
  rep.suites.push_back(run_suite("poincare_torus", n_samples, 0.0, [&](std::uint32_t r) {
    const Field2D u = torus.to_field2d(field2(r));
    return eta_torus() - poincare_audit(u, eta_torus()).ratio;
  }));
  rep.suites.push_back(run_suite("parseval_1d", n_samples, 1e-12, [&](std::uint32_t r) {
    const Field1D v(field1(r));
    const double spectral = norm_h(v);
    return std::abs(spectral - norm_h_quadrature(v, q1)) / std::max(1.0, spectral);
  }));
  rep.suites.push_back(run_suite("parseval_2d", n_samples, 1e-12, [&](std::uint32_t r) {
    const Field2D u = torus.to_field2d(field2(r));
    const double spectral = norm_h(u);
    return std::abs(spectral - norm_h_quadrature(u, q2)) / std::max(1.0, spectral);
  }));
  auto skew = [](const Model& m, const Eigen::VectorXd& a) {
    const Eigen::VectorXd n = m.nonlinear(a);
    return std::abs(n.dot(a)) / std::max(1.0, n.norm() * a.norm());
  };
  rep.suites.push_back(
      run_suite("burgers_skew", n_samples, 1e-10, [&](std::uint32_t r) { return skew(line, field1(r)); }));
  rep.suites.push_back(
      run_suite("ns_skew", n_samples, 1e-10, [&](std::uint32_t r) { return skew(torus, field2(r)); }));
  // Amplitudes log-spaced over [0.1, 10].
  const int tg_samples = std::min(n_samples, 16);
  rep.suites.push_back(run_suite("taylor_green", tg_samples, 1e-10, [&](std::uint32_t r) {
    const double amp = tg_samples > 1 ? std::pow(10.0, -1.0 + 2.0 * r / (tg_samples - 1.0)) : 1.0;
    return torus.nonlinear(torus.to_modal(taylor_green(cutoff, amp))).norm();
  }));
  return rep;
}

void to_json(nlohmann::json& j, const SuiteResult& r) {
  j = nlohmann::json{{"name", r.name},   {"samples", r.samples},     {"violations", r.violations},
                     {"worst", r.worst}, {"tolerance", r.tolerance}, {"witness_replicate", r.witness},
                     {"pass", r.pass()}};
}

void to_json(nlohmann::json& j, const InequalityReport& r) {
  j = nlohmann::json{{"suites", r.suites}, {"all_pass", r.all_pass()}};
}

}  // namespace tci
