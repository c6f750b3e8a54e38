#include "logwave/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "logwave/error.hpp"
#include "logwave/log.hpp"

namespace logwave {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n_points) {
  if (n_points < 1) throw ConfigError("", "Gauss-Legendre rule needs at least one point");
  const int n = n_points;
  std::vector<double> x(n), w(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return {std::move(x), std::move(w)};
}

DomainGrid::DomainGrid(const GridOptions& options)
    : length_(options.length),
      n_modes_(options.n_modes),
      n_cells_(options.n_cells > 0 ? options.n_cells : 2 * options.n_modes),
      nodes_per_cell_(options.nodes_per_cell) {
  if (!(length_ > 0.0) || !std::isfinite(length_))
    throw ConfigError("problem.length", "must be a positive finite number");
  if (n_modes_ < 1) throw ConfigError("problem.n_modes", "must be >= 1");
  if (options.n_cells < 0) throw ConfigError("problem.n_cells", "must be >= 0");
  if (nodes_per_cell_ < 1) throw ConfigError("problem.nodes_per_cell", "must be >= 1");

  const auto [ref_x, ref_w] = gauss_legendre(nodes_per_cell_);
  const int n_nodes = n_cells_ * nodes_per_cell_;
  nodes_.resize(n_nodes);
  weights_.resize(n_nodes);
  const double h = length_ / n_cells_;
  for (int c = 0; c < n_cells_; ++c) {
    const double mid = (c + 0.5) * h;
    for (int k = 0; k < nodes_per_cell_; ++k) {
      nodes_[c * nodes_per_cell_ + k] = mid + 0.5 * h * ref_x[k];
      weights_[c * nodes_per_cell_ + k] = 0.5 * h * ref_w[k];
    }
  }

  basis_.resize(n_nodes, n_modes_);
  basis_dx_.resize(n_nodes, n_modes_);
  const double amp = std::sqrt(2.0 / length_);
  for (int j = 1; j <= n_modes_; ++j) {
    const double kj = j * std::numbers::pi / length_;
    for (int i = 0; i < n_nodes; ++i) {
      basis_(i, j - 1) = amp * std::sin(kj * nodes_[i]);
      basis_dx_(i, j - 1) = amp * kj * std::cos(kj * nodes_[i]);
    }
  }
}

Vector DomainGrid::evaluate_at_nodes(const Vector& coeffs) const {
  return basis_ * coeffs;
}

Vector DomainGrid::project(const Vector& node_values) const {
  return basis_.transpose() * weights_.cwiseProduct(node_values);
}

double DomainGrid::integrate(const Vector& node_values) const {
  return weights_.dot(node_values);
}

double DomainGrid::gram_deviation() const {
  const Matrix gram = basis_.transpose() * weights_.asDiagonal() * basis_;
  return (gram - Matrix::Identity(n_modes_, n_modes_)).cwiseAbs().maxCoeff();
}

double DomainGrid::laplacian_eigenvalue(int j) const {
  const double k = j * std::numbers::pi / length_;
  return k * k;
}

double Diffusivity::operator()(double x) const noexcept {
  return family == Family::linear ? value + slope * x : value;
}

double Diffusivity::min_on(double length) const noexcept {
  if (family == Family::constant) return value;
  return std::min(value, value + slope * length);
}

double TimeCoefficient::operator()(double t) const noexcept {
  if (family == Family::constant) return initial;
  return asymptote + (initial - asymptote) * std::exp(-rate * t);
}

double TimeCoefficient::derivative(double t) const noexcept {
  if (family == Family::constant) return 0.0;
  return -rate * (initial - asymptote) * std::exp(-rate * t);
}

double TimeCoefficient::lower_bound() const noexcept {
  if (family == Family::constant) return initial;
  return rate > 0.0 ? std::min(initial, asymptote) : initial;
}

bool TimeCoefficient::is_constant() const noexcept {
  return family == Family::constant || rate == 0.0 || initial == asymptote;
}

CoefficientField::CoefficientField(const DomainGrid& grid, Diffusivity diffusivity,
                                   TimeCoefficient mu, double horizon)
    : diffusivity_(diffusivity), mu_(mu) {
  a0_ = diffusivity_.min_on(grid.length());
  if (!(a0_ > 0.0) || !std::isfinite(a0_))
    throw ConfigError("problem.A", "A(x) must be bounded below by a positive a0 on [0, L]");
  for (int i = 0; i < grid.n_nodes(); ++i) {
    const double a = diffusivity_(grid.nodes()[i]);
    if (!(a >= a0_) || !(a > 0.0)) {
      std::ostringstream msg;
      msg << "A(x) = " << a << " at node x = " << grid.nodes()[i] << " is not positive";
      throw ConfigError("problem.A", msg.str());
    }
  }

  if (mu_.family == TimeCoefficient::Family::exp_decay) {
    if (!(mu_.rate >= 0.0)) throw ConfigError("problem.mu.rate", "must be >= 0");
    if (mu_.initial < mu_.asymptote)
      throw ConfigError("problem.mu", "mu(t) must be nonincreasing (initial >= asymptote)");
  }
  mu0_ = mu_.lower_bound();
  if (!(mu0_ > 0.0) || !std::isfinite(mu0_))
    throw ConfigError("problem.mu", "mu(t) must be bounded below by a positive mu0");
  if (!(horizon > 0.0)) horizon = 1.0;
  constexpr int samples = 1000;
  for (int s = 0; s <= samples; ++s) {
    const double t = horizon * s / samples;
    if (mu_(t) < mu0_ || mu_.derivative(t) > 0.0)
      throw ConfigError("problem.mu", "mu(t) >= mu0 and mu'(t) <= 0 violated on the horizon");
  }
  if (mu_.is_constant())
    warn("constant mu(t): mu' < 0 a.e. does not hold; the mu' term of the energy identity vanishes");
}

Matrix assemble_stiffness(const DomainGrid& grid, const Diffusivity& diffusivity) {
  Vector weighted(grid.n_nodes());
  for (int i = 0; i < grid.n_nodes(); ++i) {
    const double a = diffusivity(grid.nodes()[i]);
    if (!(a > 0.0)) throw ConfigError("problem.A", "non-positive A(x) at a quadrature node");
    weighted[i] = grid.weights()[i] * a;
  }
  Matrix s = grid.basis_dx().transpose() * weighted.asDiagonal() * grid.basis_dx();
  // Symmetrize away the round-off of the triple product.
  return 0.5 * (s + s.transpose());
}

Matrix assemble_stiffness(const DomainGrid& grid, const CoefficientField& coeff) {
  return assemble_stiffness(grid, coeff.diffusivity());
}

double bilinear_a(const Vector& u, const Matrix& stiffness) {
  if (u.size() != stiffness.rows())
    throw std::invalid_argument("bilinear_a: coefficient vector does not match stiffness");
  return u.dot(stiffness * u);
}

}  // namespace logwave
