#include "tci/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tci/errors.hpp"

namespace tci {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kHeat: return "heat";
    case ModelKind::kBurgers: return "burgers";
    case ModelKind::kNavierStokes2D: return "ns2d";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "heat") return ModelKind::kHeat;
  if (name == "burgers") return ModelKind::kBurgers;
  if (name == "ns2d") return ModelKind::kNavierStokes2D;
  throw SchemaError("unknown model kind '" + name + "' (expected heat, burgers, ns2d)");
}

double AssumptionConstants::f_tilde_integral() const {
  constexpr int kPanels = 4096;
  const double h = horizon_T / kPanels;
  double sum = 0.5 * (f_tilde(0.0) + f_tilde(horizon_T));
  for (int i = 1; i < kPanels; ++i) sum += f_tilde(i * h);
  return sum * h;
}

ModelSpec make_heat(const NoiseOperator& noise, double horizon_T) {
  ModelSpec m;
  m.kind = ModelKind::kHeat;
  m.noise = noise;
  auto& c = m.constants;
  // 2<Lap v, v> = -2 ||v||_V^2 gives coercivity with theta = 2, K3 = 0 and boundedness
  // with K4 = 1 (||Lap v||_{V*} = ||v||_V).
  c.alpha = 2.0;
  c.theta = 2.0;
  c.K2 = noise.lipschitz() * noise.lipschitz();
  c.K3 = 0.0;
  c.K4 = 1.0;
  c.beta = 0.0;
  c.eta = eta_interval();
  c.C_B = noise.hs_bound();
  c.horizon_T = horizon_T;
  const double cb = c.C_B;
  c.f_schedule = [cb](double) { return cb; };
  return m;
}

ModelSpec make_burgers(const NoiseOperator& noise, double horizon_T) {
  ModelSpec m;
  m.kind = ModelKind::kBurgers;
  m.noise = noise;
  auto& c = m.constants;
  c.alpha = 2.0;
  c.theta = 1.5;
  c.beta = 2.0;
  c.K2 = 0.0;
  c.K2_tilde = noise.lipschitz() * noise.lipschitz();
  c.K3 = 0.0;
  c.K4_tilde = 2.0;
  c.eta = eta_interval();
  c.C_B = noise.hs_bound();
  c.horizon_T = horizon_T;
  const double cb = c.C_B;
  c.f_schedule = [cb](double) { return cb; };
  m.local_rho = LocalRho{1.0, 4.0};
  return m;
}

ModelSpec make_navier_stokes(const NoiseOperator& noise, double viscosity, double horizon_T,
                             Eigen::VectorXd forcing) {
  if (!(viscosity > 0.0)) throw ParameterError("viscosity must be positive");
  ModelSpec m;
  m.kind = ModelKind::kNavierStokes2D;
  m.noise = noise;
  m.viscosity = viscosity;
  m.forcing = std::move(forcing);
  auto& c = m.constants;
  c.alpha = 2.0;
  c.theta = viscosity;
  c.beta = 2.0;
  c.K2 = 0.0;
  c.K2_tilde = noise.lipschitz() * noise.lipschitz();
  c.K3 = 0.0;
  // ||F(v)||_{V*} <= sqrt(2) ||v||_H ||v||_V; the forcing enters f_tilde.
  c.K4_tilde = std::max(3.0 * viscosity * viscosity, 6.0);
  c.eta = eta_torus();
  c.C_B = noise.hs_bound();
  c.horizon_T = horizon_T;
  // Every divergence-free mode has |k| >= 1, so ||f||_{V*}^2 <= ||f||_H^2 / (2 pi)^2.
  // f_tilde covers coercivity (||f||^2/nu + C_B) and the forcing part of the growth bound.
  const double f_dual_sq = m.forcing.size() > 0 ? m.forcing.squaredNorm() / (kTwoPi * kTwoPi) : 0.0;
  const double level = f_dual_sq / viscosity + 3.0 * f_dual_sq + c.C_B;
  c.f_schedule = [level](double) { return level; };
  // Young's inequality with Ladyzhenskaya's constant 2 gives
  // 2 |<(w.grad)w, v>| <= 2 nu ||w||_V^2 + 27/(64 nu^3) ||v||_L4^4 ||w||_H^2.
  const double scale = 27.0 / (64.0 * viscosity * viscosity * viscosity);
  m.local_rho = LocalRho{scale, 2.0 * scale};
  return m;
}

// ---------------------------------------------------------------------------

Model::Model(ModelSpec spec, Resolution resolution) : spec_(std::move(spec)), resolution_(resolution) {
  if (spec_.is_2d()) {
    const int K = resolution_.cutoff;
    if (K < 1) throw ParameterError("cutoff must be positive");
    basis_ = std::make_shared<DivFreeBasis>(K);
    stiffness_ = spec_.viscosity * basis_->eigenvalues();
    v_weights_ = basis_->eigenvalues().cwiseSqrt();
    const int quad = resolution_.quadrature_points > 0 ? resolution_.quadrature_points
                                                       : default_quadrature_2d(K).n_points;
    if (resolution_.dealias) {
      if (quad < 3 * K + 1) {
        throw ResolutionError("dealiased products on cutoff " + std::to_string(K) + " need >= " +
                              std::to_string(3 * K + 1) + " grid points");
      }
      product_points_ = quad;
    } else {
      product_points_ = 2 * K + 1;
    }
    torus_grid_ = std::make_shared<TorusGrid>(K, product_points_);
  } else {
    const int n = resolution_.n_modes;
    if (n < 1) throw ParameterError("n_modes must be positive");
    v_weights_ = Eigen::VectorXd::LinSpaced(n, 1.0, n) * kPi;
    stiffness_ = v_weights_.cwiseAbs2();
    const int quad = resolution_.quadrature_points > 0 ? resolution_.quadrature_points
                                                       : default_quadrature(n).n_points;
    if (resolution_.dealias) {
      // v dv/dx e_k has degree <= 3n; the trapezoid rule is exact below 2N.
      if (2 * quad <= 3 * n) {
        throw ResolutionError("dealiased products on " + std::to_string(n) + " modes need > " +
                              std::to_string(3 * n / 2) + " subintervals");
      }
      product_points_ = quad;
    } else {
      product_points_ = n + 1;
    }
    sine_grid_ = std::make_shared<SineGrid>(n, product_points_);
  }
  if (spec_.noise.truncation() > dim()) {
    throw ParameterError("noise truncation N_W exceeds the number of field modes");
  }
  if (spec_.forcing.size() != 0 && spec_.forcing.size() != dim()) {
    throw ParameterError("forcing has the wrong number of modal coordinates");
  }
}

Eigen::VectorXd Model::nonlinear(const Eigen::VectorXd& a) const {
  switch (spec_.kind) {
    case ModelKind::kHeat:
      return Eigen::VectorXd::Zero(dim());
    case ModelKind::kBurgers: {
      const Eigen::VectorXd v = sine_grid_->values(a);
      const Eigen::VectorXd dv = sine_grid_->derivative(a);
      return sine_grid_->project(v.cwiseProduct(dv));
    }
    case ModelKind::kNavierStokes2D: {
      const Field2D u = basis_->to_field(a);
      const int K = u.cutoff;
      const int side = u.side();
      Eigen::MatrixXcd ikx(side, side);
      Eigen::MatrixXcd iky(side, side);
      for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
          ikx(i, j) = std::complex<double>(0.0, kTwoPi * (i - K));
          iky(i, j) = std::complex<double>(0.0, kTwoPi * (j - K));
        }
      }
      const TorusGrid& g = *torus_grid_;
      const Eigen::ArrayXXd ux = g.to_physical(u.ux).array();
      const Eigen::ArrayXXd uy = g.to_physical(u.uy).array();
      const Eigen::ArrayXXd dux_dx = g.to_physical(ikx.cwiseProduct(u.ux)).array();
      const Eigen::ArrayXXd dux_dy = g.to_physical(iky.cwiseProduct(u.ux)).array();
      const Eigen::ArrayXXd duy_dx = g.to_physical(ikx.cwiseProduct(u.uy)).array();
      const Eigen::ArrayXXd duy_dy = g.to_physical(iky.cwiseProduct(u.uy)).array();
      Field2D adv = Field2D::zero(K);
      adv.ux = g.to_spectral((ux * dux_dx + uy * dux_dy).matrix());
      adv.uy = g.to_spectral((ux * duy_dx + uy * duy_dy).matrix());
      // Projection onto the divergence-free basis is P_H.
      return -basis_->to_modal(adv);
    }
  }
  return Eigen::VectorXd::Zero(dim());
}

Eigen::VectorXd Model::forcing(double) const {
  if (spec_.forcing.size() == 0) return Eigen::VectorXd::Zero(dim());
  return spec_.forcing;
}

Eigen::VectorXd Model::drift(double t, const Eigen::VectorXd& a) const {
  Eigen::VectorXd out = linear(a) + nonlinear(a);
  if (spec_.forcing.size() != 0) out += forcing(t);
  return out;
}

double Model::norm_l4(const Eigen::VectorXd& a) const {
  if (spec_.is_2d()) return tci::norm_l4(basis_->to_field(a), default_quadrature_2d(basis_->cutoff()));
  return tci::norm_l4(Field1D(a), default_quadrature(dim()));
}

double Model::rho(const Eigen::VectorXd& a) const {
  if (!spec_.local_rho) return 0.0;
  const double l4 = norm_l4(a);
  return spec_.local_rho->scale * l4 * l4 * l4 * l4;
}

Eigen::VectorXd Model::to_modal(const Field1D& v) const {
  if (spec_.is_2d()) throw InvalidFieldError("model is two-dimensional");
  if (v.n_modes() != dim()) throw InvalidFieldError("field has the wrong number of modes");
  if (!v.coeffs.allFinite()) throw InvalidFieldError("field has a non-finite coefficient");
  return v.coeffs;
}

Eigen::VectorXd Model::to_modal(const Field2D& u) const {
  if (!spec_.is_2d()) throw InvalidFieldError("model is one-dimensional");
  validate(u, true);
  return basis_->to_modal(u);
}

Field1D Model::to_field1d(const Eigen::VectorXd& a) const {
  if (spec_.is_2d()) throw InvalidFieldError("model is two-dimensional");
  return Field1D(a);
}

Field2D Model::to_field2d(const Eigen::VectorXd& a) const {
  if (!spec_.is_2d()) throw InvalidFieldError("model is one-dimensional");
  return basis_->to_field(a);
}

Field1D drift_eval(const ModelSpec& spec, double t, const Field1D& v, bool dealias) {
  Resolution res;
  res.n_modes = v.n_modes();
  res.dealias = dealias;
  const Model model(spec, res);
  return Field1D(model.drift(t, model.to_modal(v)));
}

Field2D drift_eval(const ModelSpec& spec, double t, const Field2D& u, bool dealias) {
  Resolution res;
  res.cutoff = u.cutoff;
  res.dealias = dealias;
  const Model model(spec, res);
  return model.to_field2d(model.drift(t, model.to_modal(u)));
}

Eigen::VectorXd random_state(const Model& model, const SeedSpec& seed) {
  CounterStream stream(seed, StreamTag::kRandomField);
  const double amplitude = std::exp(4.0 * stream.uniform() - 2.0);
  const Eigen::VectorXd& w = model.v_weights();
  Eigen::VectorXd a = stream.normals(model.dim());
  for (int i = 0; i < model.dim(); ++i) a[i] *= std::pow(w[i] / w[0], -1.5);
  return amplitude * a;
}

// ---------------------------------------------------------------------------

PairEvaluation evaluate_pair(const Model& model, double t, const Eigen::VectorXd& v1,
                             const Eigen::VectorXd& v2) {
  const auto& spec = model.spec();
  const auto& c = spec.constants;
  const auto& noise = spec.noise;
  const Eigen::VectorXd w = v1 - v2;
  const double w_h2 = w.squaredNorm();
  const double dot_drift = (model.drift(t, v1) - model.drift(t, v2)).dot(w);
  const double g1 = noise.gain(model.norm_h(v1));
  const double g2 = noise.gain(model.norm_h(v2));
  const double b_diff2 = noise.gains.squaredNorm() * (g1 - g2) * (g1 - g2);

  PairEvaluation e;
  const bool local = spec.kind != ModelKind::kHeat;
  if (!local) {
    e.monotone = HypothesisTerms{2.0 * dot_drift + b_diff2, c.K2 * w_h2};
  } else {
    e.local_monotone = HypothesisTerms{2.0 * dot_drift + b_diff2, (c.K2_tilde + model.rho(v2)) * w_h2};
  }

  const Eigen::VectorXd a1 = model.drift(t, v1);
  const double v1_h = model.norm_h(v1);
  const double v1_v = model.norm_v(v1);
  const double hs1 = hs_norm(noise, v1_h);
  e.coercive = HypothesisTerms{2.0 * a1.dot(v1) + hs1 * hs1,
                               c.f_tilde(t) - c.theta * std::pow(v1_v, c.alpha) + c.K3 * v1_h * v1_h};

  const double dual_power = std::pow(model.norm_vstar(a1), c.alpha / (c.alpha - 1.0));
  if (!local) {
    e.bounded = HypothesisTerms{dual_power, c.f_tilde(t) + c.K4 * std::pow(v1_v, c.alpha)};
  } else {
    e.growth = HypothesisTerms{dual_power, (c.f_tilde(t) + c.K4_tilde * std::pow(v1_v, c.alpha)) *
                                               (1.0 + std::pow(v1_h, c.beta))};
  }
  e.hs_bound = HypothesisTerms{hs1 * hs1, c.C_B};
  if (spec.local_rho) {
    e.rho_growth = HypothesisTerms{
        model.rho(v1),
        spec.local_rho->growth_C * (1.0 + std::pow(v1_v, c.alpha)) * (1.0 + std::pow(v1_h, c.beta))};
  }
  return e;
}

double hemicontinuity_residual(const Model& model, double t, const Eigen::VectorXd& v1,
                               const Eigen::VectorXd& v2, const Eigen::VectorXd& w) {
  constexpr int kNodes = 101;
  const double h = 2.0 / (kNodes - 1);
  std::vector<double> f(kNodes);
  double scale = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    const double lambda = -1.0 + i * h;
    f[i] = model.drift(t, v1 + lambda * v2).dot(w);
    scale = std::max(scale, std::abs(f[i]));
  }
  double worst = 0.0;
  for (int i = 0; i + 1 < kNodes; ++i) {
    const double lambda = -1.0 + (i + 0.5) * h;
    const double mid = model.drift(t, v1 + lambda * v2).dot(w);
    // Quadratic through three neighbouring nodes, evaluated at the midpoint.
    const double predicted = i == 0 ? 0.375 * f[0] + 0.75 * f[1] - 0.125 * f[2]
                                    : -0.125 * f[i - 1] + 0.75 * f[i] + 0.375 * f[i + 1];
    worst = std::max(worst, std::abs(mid - predicted) / (1.0 + scale));
  }
  return worst;
}

bool AuditReport::all_pass() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

const HypothesisResult* AuditReport::find(const std::string& name) const {
  for (const auto& r : results) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

void to_json(nlohmann::json& j, const HypothesisResult& r) {
  j = nlohmann::json{{"name", r.name},
                     {"pass", r.pass},
                     {"worst_slack", r.worst_slack},
                     {"witness_replicate", r.witness_replicate},
                     {"samples", r.samples},
                     {"violations", r.violations}};
}

void to_json(nlohmann::json& j, const AuditReport& r) {
  j = nlohmann::json{{"seed", r.seed}, {"all_pass", r.all_pass()}, {"hypotheses", r.results}};
}

namespace {

class Accumulator {
 public:
  explicit Accumulator(std::string name) { result_.name = std::move(name); }

  void add(double slack, double scale, std::uint32_t replicate) {
    // Rounding-level negative slack is not a violation.
    const double tol = 1e-9 * (1.0 + scale);
    if (result_.samples == 0 || slack < result_.worst_slack) {
      result_.worst_slack = slack;
      result_.witness_replicate = replicate;
    }
    ++result_.samples;
    if (slack < -tol) {
      ++result_.violations;
      result_.pass = false;
    }
  }
  void add(const HypothesisTerms& terms, std::uint32_t replicate) {
    add(terms.slack(), std::abs(terms.lhs) + std::abs(terms.rhs), replicate);
  }
  HypothesisResult result() const { return result_; }

 private:
  HypothesisResult result_;
};

}  // namespace

AuditReport audit_hypotheses(const Model& model, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw ParameterError("n_samples must be >= 1");
  const bool local = model.spec().kind != ModelKind::kHeat;
  Accumulator h1("H1_hemicontinuity");
  Accumulator h2(local ? "H2prime_local_monotonicity" : "H2_monotonicity");
  Accumulator h3("H3_coercivity");
  Accumulator h4(local ? "H4prime_growth" : "H4_boundedness");
  Accumulator h5("H5_hs_bound");
  Accumulator rho("rho_growth");

  for (int s = 0; s < n_samples; ++s) {
    const auto replicate = static_cast<std::uint32_t>(s);
    const Eigen::VectorXd v1 = random_state(model, {seed, replicate, 0});
    Eigen::VectorXd v2 = random_state(model, {seed, replicate, 1});
    // Every fourth pair is adversarially close to parallel.
    if (s % 4 == 3) v2 = v1 + 1e-3 * v2;
    CounterStream stream({seed, replicate, 2}, StreamTag::kAudit);
    const double t = stream.uniform() * model.spec().constants.horizon_T;

    const PairEvaluation e = evaluate_pair(model, t, v1, v2);
    h2.add(local ? *e.local_monotone : *e.monotone, replicate);
    h3.add(e.coercive, replicate);
    h4.add(local ? *e.growth : *e.bounded, replicate);
    h5.add(e.hs_bound, replicate);
    if (e.rho_growth) rho.add(*e.rho_growth, replicate);

    const Eigen::VectorXd w = random_state(model, {seed, replicate, 3});
    h1.add(1e-6 - hemicontinuity_residual(model, t, v1, v2, w), 0.0, replicate);
  }

  AuditReport report;
  report.seed = seed;
  report.results = {h1.result(), h2.result(), h3.result(), h4.result(), h5.result()};
  if (model.spec().local_rho) report.results.push_back(rho.result());
  return report;
}

void to_json(nlohmann::json& j, const FeasibilityReport& r) {
  j = nlohmann::json{{"theta_eta_minus_K3", r.theta_eta_minus_K3},
                     {"coercive_margin", r.coercive_margin},
                     {"alpha_is_two", r.alpha_is_two},
                     {"c_max", r.c_max},
                     {"f_tilde_integral", r.f_tilde_integral},
                     {"f_integrable", r.f_integrable},
                     {"feasible", r.feasible()}};
}

FeasibilityReport t1_feasibility(const AssumptionConstants& c) {
  FeasibilityReport r;
  const double theta_eta = c.theta * c.eta;
  r.theta_eta_minus_K3 = theta_eta - c.K3;
  r.coercive_margin = r.theta_eta_minus_K3 > 0.0;
  r.alpha_is_two = c.alpha == 2.0;
  r.c_max = theta_eta > 0.0 ? 1.0 - c.K3 / theta_eta : 0.0;
  r.f_tilde_integral = c.f_tilde_integral();
  r.f_integrable = std::isfinite(r.f_tilde_integral);
  return r;
}

}  // namespace tci
