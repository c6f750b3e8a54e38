#pragma once

// Spatial discretization on (0, L): the Dirichlet sine eigenbasis of -d²/dx²,
// composite Gauss-Legendre quadrature, and the variable-coefficient
// stiffness S_ij = ∫ A(x) w_i'(x) w_j'(x) dx that realizes a(u, v).

#include <Eigen/Dense>
#include <numbers>
#include <utility>
#include <vector>

namespace logwave {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n_points);

struct GridOptions {
  double length = std::numbers::pi;
  int n_modes = 32;
  int n_cells = 0;  ///< 0 selects 2 * n_modes
  int nodes_per_cell = 8;
};

/// Sine basis w_j(x) = sqrt(2/L) sin(j pi x / L), j = 1..n_modes, tabulated
/// at the quadrature nodes. Immutable after construction.
class DomainGrid {
 public:
  explicit DomainGrid(const GridOptions& options = {});

  double length() const noexcept { return length_; }
  int n_modes() const noexcept { return n_modes_; }
  int n_cells() const noexcept { return n_cells_; }
  int nodes_per_cell() const noexcept { return nodes_per_cell_; }
  int n_nodes() const noexcept { return static_cast<int>(nodes_.size()); }

  const Vector& nodes() const noexcept { return nodes_; }
  const Vector& weights() const noexcept { return weights_; }
  /// n_nodes x n_modes table of w_j(x_i).
  const Matrix& basis() const noexcept { return basis_; }
  /// n_nodes x n_modes table of w_j'(x_i).
  const Matrix& basis_dx() const noexcept { return basis_dx_; }

  /// Values of sum_j c_j w_j at every node.
  Vector evaluate_at_nodes(const Vector& coeffs) const;
  /// Quadrature inner products <f, w_j>; the adjoint of evaluate_at_nodes.
  Vector project(const Vector& node_values) const;
  double integrate(const Vector& node_values) const;

  /// max |<w_i, w_j>_quad - delta_ij|.
  double gram_deviation() const;

  /// Dirichlet eigenvalue (j pi / L)^2 of mode j (1-based).
  double laplacian_eigenvalue(int j) const;

 private:
  double length_;
  int n_modes_;
  int n_cells_;
  int nodes_per_cell_;
  Vector nodes_;
  Vector weights_;
  Matrix basis_;
  Matrix basis_dx_;
};

/// Scalar diffusivity A(x) from a named family.
struct Diffusivity {
  enum class Family { constant, linear };

  Family family = Family::constant;
  double value = 1.0;  ///< A(0)
  double slope = 0.0;  ///< dA/dx for the linear family

  double operator()(double x) const noexcept;
  /// Exact minimum over [0, length].
  double min_on(double length) const noexcept;

  static Diffusivity constant(double a) { return {Family::constant, a, 0.0}; }
  static Diffusivity linear(double a, double b) { return {Family::linear, a, b}; }
};

/// mu(t): constant, or mu(t) = asymptote + (initial - asymptote) e^{-rate t}.
struct TimeCoefficient {
  enum class Family { constant, exp_decay };

  Family family = Family::constant;
  double initial = 1.0;
  double asymptote = 1.0;
  double rate = 0.0;

  double operator()(double t) const noexcept;
  double derivative(double t) const noexcept;
  /// inf_{t >= 0} mu(t).
  double lower_bound() const noexcept;
  bool is_constant() const noexcept;

  static TimeCoefficient constant(double mu) { return {Family::constant, mu, mu, 0.0}; }
  static TimeCoefficient exp_decay(double initial, double asymptote, double rate) {
    return {Family::exp_decay, initial, asymptote, rate};
  }
};

/// A(x) and mu(t) together with their lower bounds a0 and mu0.
///
/// Construction checks A >= a0 > 0 at every quadrature node and
/// mu >= mu0 > 0, mu' <= 0 on samples of [0, horizon]. A constant mu is
/// accepted with a warning: mu' < 0 a.e. fails, but every identity used
/// downstream only loses its mu' term.
class CoefficientField {
 public:
  CoefficientField(const DomainGrid& grid, Diffusivity diffusivity, TimeCoefficient mu,
                   double horizon = 100.0);

  double A(double x) const noexcept { return diffusivity_(x); }
  double mu(double t) const noexcept { return mu_(t); }
  double mu_prime(double t) const noexcept { return mu_.derivative(t); }
  double a0() const noexcept { return a0_; }
  double mu0() const noexcept { return mu0_; }

  const Diffusivity& diffusivity() const noexcept { return diffusivity_; }
  const TimeCoefficient& time_coefficient() const noexcept { return mu_; }

 private:
  Diffusivity diffusivity_;
  TimeCoefficient mu_;
  double a0_;
  double mu0_;
};

Matrix assemble_stiffness(const DomainGrid& grid, const Diffusivity& diffusivity);
Matrix assemble_stiffness(const DomainGrid& grid, const CoefficientField& coeff);

/// a(u, u) = u^T S u for modal coefficients u.
double bilinear_a(const Vector& u, const Matrix& stiffness);

/// Coefficients of u and u_t in the sine basis at time t.
struct ModalState {
  double t = 0.0;
  Vector u;
  Vector v;

  static ModalState zero(int n_modes) {
    return {0.0, Vector::Zero(n_modes), Vector::Zero(n_modes)};
  }
};

}  // namespace logwave
