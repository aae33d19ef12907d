#include "tci/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tci/errors.hpp"

namespace tci {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_finite(const Field1D& v) {
  if (v.coeffs.size() == 0) throw InvalidFieldError("field has no modes");
  if (!v.coeffs.allFinite()) throw InvalidFieldError("field has a non-finite coefficient");
}

void require_finite(const Field2D& u) {
  if (u.cutoff <= 0 || u.ux.rows() != u.side() || u.ux.cols() != u.side() ||
      u.uy.rows() != u.side() || u.uy.cols() != u.side()) {
    throw InvalidFieldError("field storage does not match cutoff");
  }
  if (!u.ux.allFinite() || !u.uy.allFinite()) {
    throw InvalidFieldError("field has a non-finite coefficient");
  }
}

// Quartic integrands of degree-n fields need 4n + 1 nodes on the torus
// (periodic rule) and 4n subintervals on the interval (trapezoid rule on the
// odd extension, exact below 2N).
void require_resolution(int n_modes, Quadrature q, bool periodic = false) {
  const int needed = periodic ? 4 * n_modes + 1 : 4 * n_modes;
  if (q.n_points < needed) {
    throw ResolutionError("quadrature with " + std::to_string(q.n_points) +
                          " points under-resolves " + std::to_string(n_modes) +
                          " modes (need >= " + std::to_string(needed) + ")");
  }
}

Eigen::VectorXd mode_wavenumbers(int n_modes) {
  return Eigen::VectorXd::LinSpaced(n_modes, 1.0, n_modes) * kPi;
}

// |k|^2 over the dense coefficient layout.
Eigen::MatrixXd wavenumber_squared(int cutoff) {
  const int side = 2 * cutoff + 1;
  Eigen::MatrixXd k2(side, side);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const double kx = i - cutoff;
      const double ky = j - cutoff;
      k2(i, j) = kx * kx + ky * ky;
    }
  }
  return k2;
}

}  // namespace

Field1D Field1D::basis(int n_modes, int k) {
  if (k < 1 || k > n_modes) throw ParameterError("basis index out of range");
  Field1D f = zero(n_modes);
  f.coeffs[k - 1] = 1.0;
  return f;
}

Field1D Field1D::sine(int n_modes, int k, double amplitude) {
  Field1D f = basis(n_modes, k);
  f.coeffs[k - 1] = amplitude / std::numbers::sqrt2;
  return f;
}

SineGrid::SineGrid(int n_modes, int n_intervals)
    : nodes_(Eigen::VectorXd::LinSpaced(n_intervals + 1, 0.0, 1.0)),
      weights_(Eigen::VectorXd::Constant(n_intervals + 1, 1.0 / n_intervals)),
      basis_(n_intervals + 1, n_modes),
      dbasis_(n_intervals + 1, n_modes) {
  if (n_modes < 1 || n_intervals < 1) throw ParameterError("empty sine grid");
  weights_[0] *= 0.5;
  weights_[n_intervals] *= 0.5;
  for (int j = 0; j <= n_intervals; ++j) {
    // Exact node positions j/N avoid drift from LinSpaced rounding.
    const double x = static_cast<double>(j) / n_intervals;
    nodes_[j] = x;
    for (int k = 1; k <= n_modes; ++k) {
      basis_(j, k - 1) = std::numbers::sqrt2 * std::sin(k * kPi * x);
      dbasis_(j, k - 1) = std::numbers::sqrt2 * k * kPi * std::cos(k * kPi * x);
    }
  }
}

double norm_h(const Field1D& v) {
  require_finite(v);
  return v.coeffs.norm();
}

double norm_v(const Field1D& v) {
  require_finite(v);
  return v.coeffs.cwiseProduct(mode_wavenumbers(v.n_modes())).norm();
}

double norm_vstar(const Field1D& v) {
  require_finite(v);
  return v.coeffs.cwiseQuotient(mode_wavenumbers(v.n_modes())).norm();
}

double norm_l4(const Field1D& v, Quadrature q) {
  require_finite(v);
  require_resolution(v.n_modes(), q);
  const SineGrid grid(v.n_modes(), q.n_points);
  const Eigen::VectorXd values = grid.values(v.coeffs);
  return std::pow(grid.integrate(values.array().square().square().matrix()), 0.25);
}

double norm_h_quadrature(const Field1D& v, Quadrature q) {
  require_finite(v);
  require_resolution(v.n_modes(), q);
  const SineGrid grid(v.n_modes(), q.n_points);
  return std::sqrt(grid.integrate(grid.values(v.coeffs).array().square().matrix()));
}

double norm_v_quadrature(const Field1D& v, Quadrature q) {
  require_finite(v);
  require_resolution(v.n_modes(), q);
  const SineGrid grid(v.n_modes(), q.n_points);
  return std::sqrt(grid.integrate(grid.derivative(v.coeffs).array().square().matrix()));
}

Field1D laplacian_apply(const Field1D& v) {
  require_finite(v);
  const Eigen::VectorXd k = mode_wavenumbers(v.n_modes());
  return Field1D(-(k.array().square() * v.coeffs.array()).matrix());
}

// ---------------------------------------------------------------------------

Field2D Field2D::zero(int cutoff) {
  if (cutoff < 1) throw ParameterError("cutoff must be positive");
  Field2D f;
  f.cutoff = cutoff;
  f.ux = Eigen::MatrixXcd::Zero(f.side(), f.side());
  f.uy = Eigen::MatrixXcd::Zero(f.side(), f.side());
  return f;
}

bool is_hermitian(const Field2D& u, double tol) {
  const int K = u.cutoff;
  for (int kx = -K; kx <= K; ++kx) {
    for (int ky = -K; ky <= K; ++ky) {
      if (std::abs(u.x(kx, ky) - std::conj(u.x(-kx, -ky))) > tol) return false;
      if (std::abs(u.y(kx, ky) - std::conj(u.y(-kx, -ky))) > tol) return false;
    }
  }
  return true;
}

bool is_mean_zero(const Field2D& u) { return u.x(0, 0) == 0.0 && u.y(0, 0) == 0.0; }

double divergence_residual(const Field2D& u) {
  double worst = 0.0;
  const int K = u.cutoff;
  for (int kx = -K; kx <= K; ++kx) {
    for (int ky = -K; ky <= K; ++ky) {
      worst = std::max(worst, std::abs(double(kx) * u.x(kx, ky) + double(ky) * u.y(kx, ky)));
    }
  }
  return worst;
}

void validate(const Field2D& u, bool require_divergence_free) {
  require_finite(u);
  if (!is_hermitian(u)) throw InvalidFieldError("field is not Hermitian-symmetric");
  if (!is_mean_zero(u)) throw InvalidFieldError("field has a nonzero mean mode");
  if (require_divergence_free && divergence_residual(u) > 1e-12) {
    throw InvalidFieldError("field is not divergence-free");
  }
}

double norm_h(const Field2D& u) {
  require_finite(u);
  return std::sqrt(u.ux.squaredNorm() + u.uy.squaredNorm());
}

double norm_v(const Field2D& u) {
  require_finite(u);
  const Eigen::ArrayXXd k2 = wavenumber_squared(u.cutoff).array();
  const double sum = (k2 * (u.ux.array().abs2() + u.uy.array().abs2())).sum();
  return kTwoPi * std::sqrt(sum);
}

double norm_vstar(const Field2D& u) {
  require_finite(u);
  Eigen::ArrayXXd inv_k2 = wavenumber_squared(u.cutoff).array().inverse();
  inv_k2(u.cutoff, u.cutoff) = 0.0;
  const double sum = (inv_k2 * (u.ux.array().abs2() + u.uy.array().abs2())).sum();
  return std::sqrt(sum) / kTwoPi;
}

double norm_l4(const Field2D& u, Quadrature q) {
  require_finite(u);
  require_resolution(u.cutoff, q, true);
  const TorusGrid grid(u.cutoff, q.n_points);
  const Eigen::ArrayXXd vx = grid.to_physical(u.ux).array();
  const Eigen::ArrayXXd vy = grid.to_physical(u.uy).array();
  const double mean = (vx.square() + vy.square()).square().mean();
  return std::pow(mean, 0.25);
}

double norm_h_quadrature(const Field2D& u, Quadrature q) {
  require_finite(u);
  require_resolution(u.cutoff, q, true);
  const TorusGrid grid(u.cutoff, q.n_points);
  const Eigen::ArrayXXd vx = grid.to_physical(u.ux).array();
  const Eigen::ArrayXXd vy = grid.to_physical(u.uy).array();
  return std::sqrt((vx.square() + vy.square()).mean());
}

Field2D laplacian_apply(const Field2D& u) {
  require_finite(u);
  const Eigen::ArrayXXd scale = -(kTwoPi * kTwoPi) * wavenumber_squared(u.cutoff).array();
  Field2D out = u;
  out.ux = (scale.cast<std::complex<double>>() * u.ux.array()).matrix();
  out.uy = (scale.cast<std::complex<double>>() * u.uy.array()).matrix();
  return out;
}

Field2D helmholtz_project(const Field2D& u) {
  require_finite(u);
  Field2D out = Field2D::zero(u.cutoff);
  const int K = u.cutoff;
  for (int kx = -K; kx <= K; ++kx) {
    for (int ky = -K; ky <= K; ++ky) {
      if (kx == 0 && ky == 0) continue;
      // Component along k_perp = (-ky, kx).
      const double k2 = double(kx) * kx + double(ky) * ky;
      const std::complex<double> s = (-double(ky) * u.x(kx, ky) + double(kx) * u.y(kx, ky)) / k2;
      out.x(kx, ky) = -double(ky) * s;
      out.y(kx, ky) = double(kx) * s;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

TorusGrid::TorusGrid(int cutoff, int n_points) : cutoff_(cutoff), phase_(n_points, 2 * cutoff + 1) {
  if (cutoff < 1 || n_points < 1) throw ParameterError("empty torus grid");
  for (int i = 0; i < n_points; ++i) {
    for (int k = -cutoff; k <= cutoff; ++k) {
      // Reduce k*i mod M before scaling so the phase is exact for large products.
      const long long r = ((static_cast<long long>(k) * i) % n_points + n_points) % n_points;
      const double angle = kTwoPi * static_cast<double>(r) / n_points;
      phase_(i, k + cutoff) = std::complex<double>(std::cos(angle), std::sin(angle));
    }
  }
}

Eigen::MatrixXd TorusGrid::to_physical(const Eigen::MatrixXcd& coeffs) const {
  return (phase_ * coeffs * phase_.transpose()).real();
}

Eigen::MatrixXcd TorusGrid::to_spectral(const Eigen::MatrixXd& values) const {
  const double m = n_points();
  Eigen::MatrixXcd out = phase_.adjoint() * values.cast<std::complex<double>>() * phase_.conjugate();
  out /= m * m;
  return out;
}

Field2D TorusGrid::sample(const std::function<std::pair<double, double>(double, double)>& fn) const {
  const int m = n_points();
  Eigen::MatrixXd vx(m, m);
  Eigen::MatrixXd vy(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const auto [a, b] = fn(static_cast<double>(i) / m, static_cast<double>(j) / m);
      vx(i, j) = a;
      vy(i, j) = b;
    }
  }
  Field2D f = Field2D::zero(cutoff_);
  f.ux = to_spectral(vx);
  f.uy = to_spectral(vy);
  f.x(0, 0) = 0.0;
  f.y(0, 0) = 0.0;
  return f;
}

// ---------------------------------------------------------------------------

DivFreeBasis::DivFreeBasis(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 1) throw ParameterError("cutoff must be positive");
  for (int kx = 0; kx <= cutoff; ++kx) {
    for (int ky = -cutoff; ky <= cutoff; ++ky) {
      if (kx == 0 && ky <= 0) continue;
      modes_.push_back({kx, ky, false});
      modes_.push_back({kx, ky, true});
    }
  }
  std::stable_sort(modes_.begin(), modes_.end(), [](const Mode& a, const Mode& b) {
    const int na = a.kx * a.kx + a.ky * a.ky;
    const int nb = b.kx * b.kx + b.ky * b.ky;
    if (na != nb) return na < nb;
    if (a.kx != b.kx) return a.kx < b.kx;
    if (a.ky != b.ky) return a.ky < b.ky;
    return !a.sine && b.sine;
  });
  eigenvalues_.resize(size());
  for (int i = 0; i < size(); ++i) {
    eigenvalues_[i] = kTwoPi * kTwoPi * (modes_[i].kx * modes_[i].kx + modes_[i].ky * modes_[i].ky);
  }
}

// With c = uhat(k) . k_perp/|k|: cosine coordinate sqrt(2) Re c, sine
// coordinate -sqrt(2) Im c.
Eigen::VectorXd DivFreeBasis::to_modal(const Field2D& u) const {
  if (u.cutoff != cutoff_) throw InvalidFieldError("cutoff mismatch");
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) {
    const auto& m = modes_[i];
    const double norm = std::sqrt(double(m.kx) * m.kx + double(m.ky) * m.ky);
    const std::complex<double> c = (-double(m.ky) * u.x(m.kx, m.ky) + double(m.kx) * u.y(m.kx, m.ky)) / norm;
    out[i] = m.sine ? -std::numbers::sqrt2 * c.imag() : std::numbers::sqrt2 * c.real();
  }
  return out;
}

Field2D DivFreeBasis::to_field(const Eigen::VectorXd& modal) const {
  if (modal.size() != size()) throw InvalidFieldError("modal vector has wrong dimension");
  Field2D f = Field2D::zero(cutoff_);
  const double half = 1.0 / std::numbers::sqrt2;
  for (int i = 0; i < size(); ++i) {
    const auto& m = modes_[i];
    const double norm = std::sqrt(double(m.kx) * m.kx + double(m.ky) * m.ky);
    const std::complex<double> c = m.sine ? std::complex<double>(0.0, -half * modal[i])
                                          : std::complex<double>(half * modal[i], 0.0);
    const double px = -m.ky / norm;
    const double py = m.kx / norm;
    f.x(m.kx, m.ky) += c * px;
    f.y(m.kx, m.ky) += c * py;
    f.x(-m.kx, -m.ky) += std::conj(c) * px;
    f.y(-m.kx, -m.ky) += std::conj(c) * py;
  }
  return f;
}

Field2D taylor_green(int cutoff, double amplitude) {
  // sin(2pi x) cos(2pi y) = sum over (+-1, +-1) of e^{2 pi i k.x} times
  // sign(kx)/(4i); -cos(2pi x) sin(2pi y) likewise with sign(ky).
  Field2D f = Field2D::zero(cutoff);
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      f.x(sx, sy) = amplitude * std::complex<double>(0.0, -0.25 * sx);
      f.y(sx, sy) = -amplitude * std::complex<double>(0.0, -0.25 * sy);
    }
  }
  return f;
}

// ---------------------------------------------------------------------------

namespace {
PoincareResult poincare_from_norms(double h, double v, double eta) {
  if (h == 0.0) throw InvalidFieldError("Poincare ratio undefined for the zero field");
  if (!(eta > 0.0)) throw ParameterError("eta must be positive");
  PoincareResult r;
  r.ratio = (v * v) / (h * h);
  r.pass = r.ratio >= eta;
  return r;
}
}  // namespace

PoincareResult poincare_audit(const Field1D& v, double eta) {
  return poincare_from_norms(norm_h(v), norm_v(v), eta);
}

PoincareResult poincare_audit(const Field2D& u, double eta) {
  return poincare_from_norms(norm_h(u), norm_v(u), eta);
}

double eta_interval() { return std::sqrt(kPi * kPi - 1.0); }
double eta_torus() { return std::sqrt(2.0 * kPi * kPi - 1.0); }

}  // namespace tci
