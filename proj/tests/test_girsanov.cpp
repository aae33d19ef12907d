#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tci/errors.hpp"
#include "tci/girsanov.hpp"

using namespace tci;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

SolverConfig config(double dt, double T, Resolution r) {
  SolverConfig c;
  c.dt = dt;
  c.T = T;
  c.resolution = r;
  return c;
}

}  // namespace

TEST_CASE("shift entropy") {
  const double dt = 1e-3;
  const int steps = 1000;
  CHECK(shift_entropy(ShiftFunction::zero(3, dt, steps)) == 0.0);
  CHECK(ShiftFunction::zero(3, dt, steps).is_zero());
  CHECK(shift_entropy(ShiftFunction::constant(3, 1.0, dt, steps)) == Approx(0.5).epsilon(1e-12));
  CHECK(shift_entropy(ShiftFunction::mode(3, 2, 1.0, dt, steps)) == Approx(0.5).epsilon(1e-12));
  // Midpoint samples of s e1: 1/2 * (1/3 - dt^2/12).
  const double ramp = shift_entropy(ShiftFunction::ramp(3, 1, 1.0, dt, steps));
  CHECK(ramp == Approx(1.0 / 6.0).epsilon(1e-6));
  CHECK(ramp == Approx(0.5 * (1.0 / 3.0 - dt * dt / 12.0)).epsilon(1e-12));
  CHECK(ShiftFunction::mode(3, 2, 1.0, dt, steps).at_step(5)[1] == 1.0);
}

TEST_CASE("zero shift gives identical legs") {
  const Resolution r{12, 4, true, 0};
  const Model burgers(make_burgers(make_inverse_k_noise(6, 0.5, GainClamp{0.5, 1.0})), r);
  const SolverConfig c = config(1e-3, 0.2, r);
  const Eigen::VectorXd x0 = burgers.to_modal(Field1D::sine(12, 1, 0.5));
  const CoupledPair p = coupled_solve(burgers, c, x0, ShiftFunction::zero(6, c.dt, c.steps()), {3, 1, 0});
  CHECK(p.sup_gap_sq == 0.0);
  CHECK(log_radon_nikodym(p) == 0.0);
  CHECK(p.log_rn_reference == 0.0);
  CHECK((p.x_traj.final_state - p.y_traj.final_state).norm() == 0.0);
  // Y is the plain solution.
  CHECK((p.y_traj.final_state - solve(burgers, c, x0, {3, 1, 0}).final_state).norm() == 0.0);

  const ContractionReport rep = contraction_report(burgers, c, x0, ShiftFunction::zero(6, c.dt, c.steps()), 8, 3);
  CHECK(rep.gap.mean == 0.0);
  CHECK(rep.pass);
}

TEST_CASE("heat gap follows the deterministic ODE") {
  const Resolution r{8, 4, true, 0};
  const Model heat(make_heat(make_single_mode_noise(8, 1.0)), r);
  const SolverConfig c = config(2.5e-4, 1.0, r);
  const ShiftFunction h = ShiftFunction::mode(8, 1, 1.0, c.dt, c.steps());
  const CoupledPair p = coupled_solve(heat, c, Eigen::VectorXd::Zero(8), h, {1, 0, 0});
  const double oracle = std::pow((1.0 - std::exp(-kPi * kPi)) / (kPi * kPi), 2);
  CHECK(p.sup_gap_sq == Approx(oracle).epsilon(0.01));

  // Implicit-Euler recursion of the gap ODE.
  double m = 0.0, sup = 0.0;
  for (int k = 0; k < c.steps(); ++k) {
    m = (m + c.dt) / (1.0 + c.dt * kPi * kPi);
    sup = std::max(sup, m * m);
  }
  CHECK(p.sup_gap_sq == Approx(sup).epsilon(1e-9));

  const ShiftFunction h2 = ShiftFunction::mode(8, 1, 2.0, c.dt, c.steps());
  const CoupledPair p2 = coupled_solve(heat, c, Eigen::VectorXd::Zero(8), h2, {1, 0, 0});
  const double g1 = (p.x_traj.final_state - p.y_traj.final_state).norm();
  const double g2 = (p2.x_traj.final_state - p2.y_traj.final_state).norm();
  CHECK(std::abs(g2 - 2.0 * g1) <= 1e-10);

  CHECK_THROWS_AS(coupled_solve(heat, c, Eigen::VectorXd::Zero(8), ShiftFunction::mode(4, 1, 1.0, c.dt, c.steps()),
                                {1, 0, 0}),
                  ParameterError);
}

TEST_CASE("Radon-Nikodym identities") {
  const Resolution r{8, 4, true, 0};
  const Model heat(make_heat(make_single_mode_noise(8, 1.0)), r);
  const SolverConfig c = config(1e-2, 1.0, r);
  const ShiftFunction h = ShiftFunction::mode(8, 1, 1.0, c.dt, c.steps());
  const CoupledEnsemble e = run_coupled_ensemble(heat, c, Eigen::VectorXd::Zero(8), h,
                                                 {FunctionalSpec::sup_h_norm()}, 4096, 17);
  CHECK(e.diverged().empty());

  const std::vector<double> log_rn = e.log_rns();
  const MeanEstimate entropy = mean_estimate(log_rn);
  CHECK(std::abs(entropy.mean - shift_entropy(h)) <= 3.0 * entropy.std_error);

  std::vector<double> weights;
  for (double l : e.log_rn_references()) weights.push_back(std::exp(l));
  const MeanEstimate mart = mean_estimate(weights);
  CHECK(std::abs(mart.mean - 1.0) <= 3.0 * mart.std_error);

  const ContractionReport rep = contraction_report(e, h, t2_constant(t2_query(heat, c.T)));
  CHECK(rep.constant.value == Approx(4.0));
  CHECK(rep.bound == Approx(4.0).epsilon(1e-12));
  CHECK(rep.pass);
  CHECK(rep.margin > 3.9);
}

TEST_CASE("ensembles are reproducible and order independent") {
  const Resolution r{8, 4, true, 0};
  const Model burgers(make_burgers(make_inverse_k_noise(4, 0.2)), r);
  const SolverConfig c = config(1e-2, 0.5, r);
  const ShiftFunction h = ShiftFunction::constant(4, 1.0, c.dt, c.steps());
  const Eigen::VectorXd x0 = burgers.to_modal(Field1D::sine(8, 1, 0.3));
  const std::vector<FunctionalSpec> fs{FunctionalSpec::sup_h_norm(), FunctionalSpec::l2_v_path_norm()};
  const CoupledEnsemble a = run_coupled_ensemble(burgers, c, x0, h, fs, 64, 5);
  const CoupledEnsemble b = run_coupled_ensemble(burgers, c, x0, h, fs, 64, 5);
  CHECK(a.gaps() == b.gaps());
  CHECK(a.shifted_values(1) == b.shifted_values(1));
  const CoupledPair single = coupled_solve(burgers, c, x0, h, {5, 10, 0});
  CHECK(a.samples[10].sup_gap_sq == single.sup_gap_sq);
  CHECK(a.samples[10].log_rn == single.log_rn);
  CHECK_THROWS_AS(run_coupled_ensemble(burgers, c, x0, h, fs, 1, 5), ParameterError);
}

TEST_CASE("divergent replicates are recorded") {
  const Resolution r{8, 4, true, 0};
  // Huge noise on an explicit nonlinearity blows up quickly.
  const Model burgers(make_burgers(make_inverse_k_noise(4, 1e8)), r);
  const SolverConfig c = config(1e-1, 1.0, r);
  const ShiftFunction h = ShiftFunction::zero(4, c.dt, c.steps());
  const CoupledEnsemble e =
      run_coupled_ensemble(burgers, c, Eigen::VectorXd::Zero(8), h, {FunctionalSpec::sup_h_norm()}, 8, 1);
  CHECK_FALSE(e.diverged().empty());
  for (auto rep : e.diverged()) CHECK(e.samples[rep].divergence_step >= 0);
  CHECK(e.gaps().size() + e.diverged().size() == 8);
}

TEST_CASE("contraction report JSON") {
  ContractionReport r;
  r.gap = MeanEstimate{0.5, 0.1, 0.0, 10};
  r.pass = true;
  const nlohmann::json j = r;
  CHECK(j.at("sup_gap_sq").at("mean") == 0.5);
  CHECK(j.at("pass") == true);
}
