#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "tci/noise.hpp"
#include "tci/spaces.hpp"

namespace tci {

enum class ModelKind { kHeat, kBurgers, kNavierStokes2D };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Constants of the structural hypotheses. f_tilde(t) is the deterministic
/// coercivity schedule; when unset it defaults to the model's natural value
/// (C_B, plus ||f||_{V*}^2 / nu for Navier-Stokes).
struct AssumptionConstants {
  double alpha = 2.0;
  double theta = 1.0;
  double K2 = 0.0;
  double K3 = 0.0;
  double K4 = 1.0;
  double beta = 0.0;
  double K2_tilde = 0.0;
  double K4_tilde = 0.0;
  double eta = 1.0;
  double C_B = 1.0;
  double C1 = 2.0;
  double horizon_T = 1.0;
  std::function<double(double)> f_schedule;

  double f_tilde(double t) const { return f_schedule ? f_schedule(t) : 0.0; }
  /// Trapezoid integral of f_tilde over [0, horizon_T] with 4096 panels.
  double f_tilde_integral() const;
};

/// rho(v) = scale * ||v||_{L4}^4 with the growth bound
/// rho(v) <= growth_C (1 + ||v||_V^alpha)(1 + ||v||_H^beta).
struct LocalRho {
  double scale = 1.0;
  double growth_C = 4.0;
};

struct ModelSpec {
  ModelKind kind = ModelKind::kHeat;
  AssumptionConstants constants;
  double viscosity = 1.0;          // Navier-Stokes only
  Eigen::VectorXd forcing;         // modal coordinates, time-independent; empty = none
  NoiseOperator noise;
  std::optional<LocalRho> local_rho;

  bool is_2d() const { return kind == ModelKind::kNavierStokes2D; }
};

/// Reference instances with the constants used throughout the examples:
/// heat (theta = 2, K3 = 0, eta = sqrt(pi^2-1)), Burgers (alpha = beta = 2,
/// theta = 3/2, rho = ||v||_L4^4), Navier-Stokes (theta = nu, eta =
/// sqrt(2 pi^2 - 1)). f_tilde defaults to C_B (+ ||f||^2_{V*}/nu).
ModelSpec make_heat(const NoiseOperator& noise, double horizon_T = 1.0);
ModelSpec make_burgers(const NoiseOperator& noise, double horizon_T = 1.0);
ModelSpec make_navier_stokes(const NoiseOperator& noise, double viscosity, double horizon_T = 1.0,
                             Eigen::VectorXd forcing = {});

struct Resolution {
  int n_modes = 32;        // 1-D sine modes
  int cutoff = 16;         // 2-D wavevector cutoff
  bool dealias = true;     // exact (padded-grid) products
  int quadrature_points = 0;  // 0 = automatic (4 n_modes or 4 cutoff)
};

/// A ModelSpec bound to a Galerkin discretisation. State vectors are
/// coordinates in an orthonormal basis of H: the sine basis in 1-D, the
/// divergence-free Fourier basis in 2-D. Immutable after construction.
class Model {
 public:
  Model(ModelSpec spec, Resolution resolution);

  const ModelSpec& spec() const { return spec_; }
  const Resolution& resolution() const { return resolution_; }
  int dim() const { return static_cast<int>(stiffness_.size()); }

  /// Eigenvalues of the linear part -A_lin: (k pi)^2 or nu (2 pi |k|)^2.
  const Eigen::VectorXd& stiffness() const { return stiffness_; }
  /// Per-coordinate weights of the V-norm: k pi or 2 pi |k|.
  const Eigen::VectorXd& v_weights() const { return v_weights_; }

  Eigen::VectorXd linear(const Eigen::VectorXd& a) const { return -stiffness_.cwiseProduct(a); }
  /// Burgers v dv/dx, Navier-Stokes -P_H[(u.grad)u], zero for heat.
  Eigen::VectorXd nonlinear(const Eigen::VectorXd& a) const;
  Eigen::VectorXd forcing(double t) const;
  /// A(t, v) = linear + nonlinear + forcing.
  Eigen::VectorXd drift(double t, const Eigen::VectorXd& a) const;

  double norm_h(const Eigen::VectorXd& a) const { return a.norm(); }
  double norm_v(const Eigen::VectorXd& a) const { return a.cwiseProduct(v_weights_).norm(); }
  double norm_vstar(const Eigen::VectorXd& a) const { return a.cwiseQuotient(v_weights_).norm(); }
  double norm_l4(const Eigen::VectorXd& a) const;
  /// rho(v); zero when the model declares no local term.
  double rho(const Eigen::VectorXd& a) const;

  Eigen::VectorXd to_modal(const Field1D& v) const;
  Eigen::VectorXd to_modal(const Field2D& u) const;
  Field1D to_field1d(const Eigen::VectorXd& a) const;
  Field2D to_field2d(const Eigen::VectorXd& a) const;

  /// Natural grid size used for products under the current dealias setting.
  int product_points() const { return product_points_; }

 private:
  ModelSpec spec_;
  Resolution resolution_;
  Eigen::VectorXd stiffness_;
  Eigen::VectorXd v_weights_;
  int product_points_ = 0;
  std::shared_ptr<const SineGrid> sine_grid_;
  std::shared_ptr<const TorusGrid> torus_grid_;
  std::shared_ptr<const DivFreeBasis> basis_;
};

/// Convenience evaluation of A(t, v) on fields; returns V* coefficients in
/// the same representation.
Field1D drift_eval(const ModelSpec& spec, double t, const Field1D& v, bool dealias = true);
Field2D drift_eval(const ModelSpec& spec, double t, const Field2D& u, bool dealias = true);

/// Spectrally decaying random state: N(0,1) coordinates with a |k|^-1.5
/// envelope times a log-uniform amplitude in [e^-2, e^2].
Eigen::VectorXd random_state(const Model& model, const SeedSpec& seed);

// ---------------------------------------------------------------------------
// Hypothesis audit
// ---------------------------------------------------------------------------

/// Left and right sides of one hypothesis instance; slack = rhs - lhs.
struct HypothesisTerms {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack() const { return rhs - lhs; }
};

struct PairEvaluation {
  std::optional<HypothesisTerms> monotone;        // monotonicity, heat
  std::optional<HypothesisTerms> local_monotone;  // local monotonicity, Burgers / NS
  HypothesisTerms coercive;                       // coercivity at v1
  std::optional<HypothesisTerms> bounded;         // boundedness, heat
  std::optional<HypothesisTerms> growth;          // growth, Burgers / NS
  HypothesisTerms hs_bound;                       // noise HS bound at v1
  std::optional<HypothesisTerms> rho_growth;      // rho(v1) bound
};

PairEvaluation evaluate_pair(const Model& model, double t, const Eigen::VectorXd& v1,
                             const Eigen::VectorXd& v2);

/// Max relative residual of lambda -> <A(v1 + lambda v2), w> on a 101-point
/// grid in [-1, 1] against quadratic interpolation at the midpoints.
double hemicontinuity_residual(const Model& model, double t, const Eigen::VectorXd& v1,
                               const Eigen::VectorXd& v2, const Eigen::VectorXd& w);

struct HypothesisResult {
  std::string name;
  bool pass = true;
  double worst_slack = 0.0;
  std::uint32_t witness_replicate = 0;
  int samples = 0;
  int violations = 0;
};

struct AuditReport {
  std::vector<HypothesisResult> results;
  std::uint64_t seed = 0;
  bool all_pass() const;
  const HypothesisResult* find(const std::string& name) const;
};

void to_json(nlohmann::json& j, const HypothesisResult& r);
void to_json(nlohmann::json& j, const AuditReport& r);

AuditReport audit_hypotheses(const Model& model, int n_samples, std::uint64_t seed);

struct FeasibilityReport {
  double theta_eta_minus_K3 = 0.0;
  bool coercive_margin = false;  // theta eta - K3 > 0
  bool alpha_is_two = false;
  double c_max = 0.0;            // 1 - K3 / (theta eta)
  double f_tilde_integral = 0.0;
  bool f_integrable = false;
  bool feasible() const { return coercive_margin && alpha_is_two && f_integrable; }
};

void to_json(nlohmann::json& j, const FeasibilityReport& r);

FeasibilityReport t1_feasibility(const AssumptionConstants& c);

}  // namespace tci
