#pragma once

// Variational constants and potential-well geometry on the Galerkin space.
//
// Every "best constant" here is a supremum over span{w_1..w_k} computed with
// the same quadrature as the dynamics, so the inequalities among these
// numbers (r_* <= rho_*, d >= M, sign structure of I) hold for the discrete
// system exactly as they do for the continuous one.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "logwave/field.hpp"
#include "logwave/functionals.hpp"

namespace logwave {

struct OptimizerSettings {
  int restarts = 20;
  double tolerance = 1e-10;  ///< relative objective change that counts as converged
  int max_iterations = 4000;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct EmbeddingResult {
  double value = 0.0;  ///< best ratio found
  Vector maximizer;    ///< modal coefficients attaining it
  bool converged = false;
  int iterations = 0;  ///< iterations of the winning restart
};

/// Smallest B with ||u||_2^2 <= B ||u'||_2^2 on the discrete space (1 / lambda_1).
double poincare_B7(const DomainGrid& grid);

/// sup_{u != 0} ||u||_r / sqrt(a(u,u)) over the discrete space.
///
/// Multi-start ascent on the ellipsoid {a(u,u) = 1} preconditioned by S^{-1};
/// the full step is the nonlinear power iteration, which increases the convex
/// objective ||u||_r^r monotonically, and backtracking guards round-off.
/// Starts: w_1, each of `extra_starts`, then `restarts` seeded Gaussian draws.
EmbeddingResult embedding_K(const DomainGrid& grid, const Matrix& stiffness, double r,
                            const OptimizerSettings& settings,
                            std::span<const Vector> extra_starts = {});

/// sup ||u||_{p+2}^q / ||u||_q^q on the discrete sphere (the constant B6 of
/// the negative-energy blow-up argument). Requires p + 2 < q.
EmbeddingResult embedding_B6(const Problem& problem, const OptimizerSettings& settings);

/// r(gamma) = (mu0 e gamma / K0^{q+gamma})^{1/(q+gamma-2)}.
double radius_r(double gamma, double K0, double mu0, double q);

/// rho(gamma) = (mu0 e gamma / K1^{q+gamma})^{1/(q+gamma-2)} |Omega|^{gamma/(q(q+gamma-2))}.
double radius_rho(double gamma, double K1, double mu0, double q, double measure);

/// Numerator g(gamma) of d/dgamma log rho(gamma); positive before the
/// interior maximum of rho, negative after.
double rho_slope_numerator(double gamma, double K1, double mu0, double q, double measure);

/// Logarithmically spaced gamma grid on [gamma_min, gamma_max].
std::vector<double> gamma_grid(double gamma_min, double gamma_max, int points);

struct GammaGridSettings {
  double gamma_min = 1e-3;
  double gamma_max = 50.0;
  int points = 64;
  int max_doublings = 4;
};

struct RadiusSupremum {
  double r_star = 0.0;
  double rho_star = 0.0;
  double gamma_r = 0.0;    ///< argmax of r on the grid
  double gamma_rho = 0.0;  ///< argmax of rho on the grid
  double K1 = 0.0;
  Vector K1_maximizer;
  std::vector<double> gammas;
  std::vector<double> K0;
  std::vector<double> r_values;
  std::vector<double> rho_values;
  bool boundary = false;     ///< sup of r still at the right edge after all doublings
  bool approximate = false;  ///< some optimizer run did not converge
};

/// sup of r(gamma) and rho(gamma) over a given grid, with K0(gamma) and K1
/// already known. The building block of `r_star`.
std::pair<double, double> radius_sup(std::span<const double> gammas, std::span<const double> K0,
                                     double K1, double mu0, double q, double measure);

/// r_* and rho_* with K0(gamma) = K(q + gamma) computed per grid point. The
/// grid's right edge is doubled (up to `max_doublings` times) while the sup
/// of r sits on it.
RadiusSupremum r_star(const Problem& problem, const GammaGridSettings& grid_settings,
                      const OptimizerSettings& settings);

/// M = ((q - 2) / (2q)) mu0 r_*^2.
double well_depth_M(double r_star, double mu0, double q);

/// The unique lambda_* > 0 with I(lambda_* u) = 0, by bisection in log lambda
/// on [1e-12, 1e12], using `mu` for mu(t). Throws NumericalError when u = 0 or
/// no sign change exists on the bracket.
double mountain_pass_lambda(const Problem& problem, const Vector& u, double mu);

struct NehariSample {
  double value = 0.0;   ///< min J(lambda_* u) over the sampled directions
  int argmin = 0;       ///< index of the minimizing direction
  Vector direction;     ///< lambda_* u at the minimum (a point of the Nehari set)
};

/// Sampled mountain-pass level at mu = mu0: the first min(8, k) directions
/// are pure modes, the rest seeded Gaussian coefficient draws. The sample
/// sequence for n is a prefix of the sequence for n + 1.
NehariSample d_estimate(const Problem& problem, int n_samples, std::uint64_t seed);

/// theta = 1 - (M / E0)^{(2-q)/q}; nullopt unless 0 < E0 < M.
std::optional<double> theta_bound(double M, double E0, double q);

struct XiEstimate {
  double eta = 0.0;
  double eps = 0.0;
  double xi1 = 0.0;
};

/// Best (eta, eps) on nested logarithmic grids (`points_per_decade`) meeting
/// the four strict feasibility conditions of the negative-energy argument,
/// and the resulting xi_1. `pairing` is <u0, u1> (enters Y(0) > 0).
/// Requires q > p + 2 and G0 = -E(0) > 0; throws NumericalError when the grid
/// holds no feasible pair.
XiEstimate xi1_estimate(const Exponents& exponents, double mu0, double B6, double G0,
                        double pairing = 0.0, int points_per_decade = 4);

/// xi = xi1 / xi3 with xi3 = 2^{1/(1-alpha)} (1 + eps^{1/(1-alpha)} (1 + 1/G0)).
double xi_from_xi1(const XiEstimate& estimate, double alpha, double G0);

/// T* = ((1 - alpha) / (alpha xi)) Y0^{-alpha/(1-alpha)}: the time by which
/// Y' >= xi Y^{1/(1-alpha)} forces Y to blow up.
double blowup_time_bound(double Y0, double xi, double alpha);

/// Inputs of the positive-energy blow-up condition.
struct Thm52Constants {
  double q;
  double p;
  double a0;
  double mu0;
  double B7;
};

double h1(double eps, const Thm52Constants& c);
double h2(double eps, const Thm52Constants& c);
double h3(double eps, const Thm52Constants& c);

struct EpsilonPrime {
  double value = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
  double residual = 0.0;  ///< h1 - h3 at the root
  double upper = 0.0;     ///< eps_2 = 1 - 2/q, where h2 vanishes
};

/// Root of h1(eps) = h3(eps) in (0, 1 - 2/q) by bisection.
EpsilonPrime epsilon_prime(const Thm52Constants& constants);

struct GeometrySettings {
  GammaGridSettings gamma;
  OptimizerSettings optimizer;
  int d_samples = 64;
};

/// All computed well constants for one problem.
struct WellGeometry {
  double q = 0.0;
  double p = 0.0;
  double a0 = 0.0;
  double mu0 = 0.0;
  double measure = 0.0;
  double B7 = 0.0;
  double K1 = 0.0;
  std::vector<std::pair<double, double>> K0_samples;  ///< (gamma, K0(gamma))
  std::vector<double> gamma_grid;
  double gamma_r = 0.0;
  double r_star = 0.0;
  double rho_star = 0.0;
  double M = 0.0;
  double d_estimate = 0.0;
  std::optional<double> B6;            ///< only when q > p + 2
  std::optional<EpsilonPrime> eps_prime;  ///< only when q > p + 2
  bool boundary = false;
  bool approximate = false;
};

WellGeometry compute_geometry(const Problem& problem, const GeometrySettings& settings);

}  // namespace logwave
