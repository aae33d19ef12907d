#pragma once

#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace tci {

// ---------------------------------------------------------------------------
// 1-D Dirichlet interval [0,1]
//
// A field is a finite sine series v(x) = sum_k c_k e_k(x) with
// e_k(x) = sqrt(2) sin(k pi x), orthonormal in L2(0,1). coeffs[k-1] holds c_k.
// ---------------------------------------------------------------------------

struct Field1D {
  Eigen::VectorXd coeffs;

  Field1D() = default;
  explicit Field1D(Eigen::VectorXd c) : coeffs(std::move(c)) {}

  int n_modes() const { return static_cast<int>(coeffs.size()); }

  static Field1D zero(int n_modes) { return Field1D(Eigen::VectorXd::Zero(n_modes)); }
  /// The orthonormal basis element e_k (k is 1-based).
  static Field1D basis(int n_modes, int k);
  /// amplitude * sin(k pi x), i.e. (amplitude / sqrt 2) e_k.
  static Field1D sine(int n_modes, int k, double amplitude = 1.0);
};

/// Uniform-grid rule. On the interval this is the trapezoid rule with
/// n_points subintervals; on the torus it is the rectangle rule with
/// n_points nodes per direction.
struct Quadrature {
  int n_points = 0;
};

/// Smallest rule satisfying the anti-aliasing invariant n_points >= 4 n_modes.
inline Quadrature default_quadrature(int n_modes) { return Quadrature{4 * n_modes}; }
/// Torus rule for cutoff K: 4K + 2 nodes (quartic products need > 4K).
inline Quadrature default_quadrature_2d(int cutoff) { return Quadrature{4 * cutoff + 2}; }

/// Physical-space evaluation of sine series on a trapezoid grid.
class SineGrid {
 public:
  SineGrid(int n_modes, int n_intervals);

  int n_modes() const { return static_cast<int>(basis_.cols()); }
  int n_intervals() const { return static_cast<int>(basis_.rows()) - 1; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  Eigen::VectorXd values(const Eigen::VectorXd& coeffs) const { return basis_ * coeffs; }
  Eigen::VectorXd derivative(const Eigen::VectorXd& coeffs) const { return dbasis_ * coeffs; }
  /// L2 projection of grid values onto the sine modes.
  Eigen::VectorXd project(const Eigen::VectorXd& grid_values) const {
    return basis_.transpose() * weights_.cwiseProduct(grid_values);
  }
  double integrate(const Eigen::VectorXd& grid_values) const { return weights_.dot(grid_values); }

 private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd dbasis_;
};

double norm_h(const Field1D& v);
double norm_v(const Field1D& v);
/// Dual norm with weights 1/(k pi), consistent with the Gelfand triple.
double norm_vstar(const Field1D& v);
double norm_l4(const Field1D& v, Quadrature q);
double norm_h_quadrature(const Field1D& v, Quadrature q);
/// ||dv/dx||_{L2} by quadrature.
double norm_v_quadrature(const Field1D& v, Quadrature q);
Field1D laplacian_apply(const Field1D& v);

// ---------------------------------------------------------------------------
// 2-D periodic unit torus
//
// u(x) = sum_k uhat(k) exp(2 pi i k.x) over integer k with |kx|,|ky| <= cutoff,
// k != 0. Each uhat(k) is a complex 2-vector, stored as two dense
// (2 cutoff + 1)^2 arrays indexed (kx + cutoff, ky + cutoff).
// ---------------------------------------------------------------------------

struct Field2D {
  int cutoff = 0;
  Eigen::MatrixXcd ux;
  Eigen::MatrixXcd uy;

  Field2D() = default;
  static Field2D zero(int cutoff);

  int side() const { return 2 * cutoff + 1; }
  std::complex<double>& x(int kx, int ky) { return ux(kx + cutoff, ky + cutoff); }
  std::complex<double>& y(int kx, int ky) { return uy(kx + cutoff, ky + cutoff); }
  std::complex<double> x(int kx, int ky) const { return ux(kx + cutoff, ky + cutoff); }
  std::complex<double> y(int kx, int ky) const { return uy(kx + cutoff, ky + cutoff); }
};

bool is_hermitian(const Field2D& u, double tol = 1e-12);
bool is_mean_zero(const Field2D& u);
/// max_k |k . uhat(k)|
double divergence_residual(const Field2D& u);
/// Throws InvalidFieldError unless finite, Hermitian, and mean-zero (and
/// divergence-free to 1e-12 when requested).
void validate(const Field2D& u, bool require_divergence_free = false);

double norm_h(const Field2D& u);
double norm_v(const Field2D& u);
double norm_vstar(const Field2D& u);
/// (integral |u|^4)^(1/4) with |.| the Euclidean norm of the vector value.
double norm_l4(const Field2D& u, Quadrature q);
double norm_h_quadrature(const Field2D& u, Quadrature q);
Field2D laplacian_apply(const Field2D& u);
Field2D helmholtz_project(const Field2D& u);

/// Separable trigonometric transform between Field2D coefficients and an
/// M x M physical grid with nodes x_i = i / M. Exact for trigonometric
/// polynomials of degree < M.
class TorusGrid {
 public:
  TorusGrid(int cutoff, int n_points);

  int cutoff() const { return cutoff_; }
  int n_points() const { return static_cast<int>(phase_.rows()); }

  /// Real grid values (row index = x node, column = y node).
  Eigen::MatrixXd to_physical(const Eigen::MatrixXcd& coeffs) const;
  /// Coefficients for |kx|,|ky| <= cutoff of the grid function.
  Eigen::MatrixXcd to_spectral(const Eigen::MatrixXd& values) const;
  /// Spectral coefficients of a field sampled from a function of (x, y).
  Field2D sample(const std::function<std::pair<double, double>(double, double)>& fn) const;

 private:
  int cutoff_;
  Eigen::MatrixXcd phase_;  // M x (2 cutoff + 1), exp(2 pi i k x_i)
};

/// Real orthonormal basis of divergence-free mean-zero fields on the torus:
/// for each wavevector k in the upper half-plane, sqrt(2) cos(2 pi k.x) k_perp
/// / |k| and sqrt(2) sin(2 pi k.x) k_perp / |k|, ordered by |k|^2, then kx,
/// then ky, cosine before sine.
class DivFreeBasis {
 public:
  explicit DivFreeBasis(int cutoff);

  int cutoff() const { return cutoff_; }
  int size() const { return static_cast<int>(modes_.size()); }
  std::pair<int, int> wavevector(int index) const { return {modes_[index].kx, modes_[index].ky}; }
  bool is_sine(int index) const { return modes_[index].sine; }
  /// Eigenvalues (2 pi |k|)^2 of -Laplacian, in basis order.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  /// Coordinates of the divergence-free part of u.
  Eigen::VectorXd to_modal(const Field2D& u) const;
  Field2D to_field(const Eigen::VectorXd& modal) const;

 private:
  struct Mode {
    int kx;
    int ky;
    bool sine;
  };
  int cutoff_;
  std::vector<Mode> modes_;
  Eigen::VectorXd eigenvalues_;
};

/// Taylor-Green vortex (sin 2pi x cos 2pi y, -cos 2pi x sin 2pi y).
Field2D taylor_green(int cutoff, double amplitude = 1.0);

// ---------------------------------------------------------------------------
// Poincare audit: ||v||_V^2 / ||v||_H^2 against eta (squared-norm form).
// ---------------------------------------------------------------------------

struct PoincareResult {
  double ratio = 0.0;
  bool pass = false;
};

PoincareResult poincare_audit(const Field1D& v, double eta);
PoincareResult poincare_audit(const Field2D& u, double eta);

/// eta values for the two geometries: sqrt(pi^2 - 1) and sqrt(2 pi^2 - 1).
double eta_interval();
double eta_torus();

}  // namespace tci
