#include "logwave/varconst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "logwave/error.hpp"
#include "parallel.hpp"

namespace logwave {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log ||u||_r and its gradient with respect to the modal coefficients,
/// evaluated with the max-scaled integrand so large r cannot overflow.
struct LogNorm {
  double value = kNegInf;
  Vector gradient;
};

LogNorm log_lr_norm(const DomainGrid& grid, const Vector& c, double r) {
  const Vector u = grid.evaluate_at_nodes(c);
  const double peak = u.cwiseAbs().maxCoeff();
  LogNorm out;
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    out.gradient = Vector::Zero(c.size());
    return out;
  }
  const Vector& w = grid.weights();
  Vector signed_power(u.size());
  double sum = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]) / peak;
    const double pw = a == 0.0 ? 0.0 : std::exp((r - 1.0) * std::log(a));
    sum += w[i] * pw * a;
    signed_power[i] = std::copysign(pw, u[i]);
  }
  out.value = std::log(peak) + std::log(sum) / r;
  out.gradient = grid.project(signed_power) / (peak * sum);
  return out;
}

Vector gaussian_direction(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector c(n);
  for (int j = 0; j < n; ++j) c[j] = normal(rng);
  return c;
}

std::uint64_t restart_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 step so neighbouring restarts get unrelated streams
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Ascent {
  double log_value = kNegInf;
  Vector c;
  bool converged = false;
  int iterations = 0;
};

double s_norm(const Matrix& S, const Vector& c) { return std::sqrt(c.dot(S * c)); }

/// Maximizes log ||u||_r on {c^T S c = 1}.
Ascent ascend_embedding(const DomainGrid& grid, const Matrix& S, const Eigen::LDLT<Matrix>& solver,
                        double r, Vector c, double tol, int max_iterations) {
  Ascent out;
  const double n0 = s_norm(S, c);
  if (!(n0 > 0.0)) return out;
  c /= n0;
  LogNorm current = log_lr_norm(grid, c, r);
  int it = 0;
  for (; it < max_iterations; ++it) {
    const Vector d = solver.solve(current.gradient);
    const double nd = s_norm(S, d);
    if (!(nd > 0.0)) {
      out.converged = true;
      break;
    }
    const Vector target = d / nd;
    double tau = 1.0;
    bool accepted = false;
    Vector trial;
    LogNorm next;
    for (int bt = 0; bt < 50; ++bt, tau *= 0.5) {
      trial = c + tau * (target - c);
      trial /= s_norm(S, trial);
      next = log_lr_norm(grid, trial, r);
      if (next.value >= current.value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.converged = true;
      break;
    }
    const double change = next.value - current.value;
    c = std::move(trial);
    current = std::move(next);
    if (change <= tol) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.log_value = current.value;
  out.c = std::move(c);
  out.iterations = it;
  return out;
}

/// Maximizes log ||u||_s - log ||u||_q on the unit sphere by projected
/// gradient ascent with an adaptive, backtracked step.
Ascent ascend_ratio(const DomainGrid& grid, double s, double q, Vector c, double tol,
                    int max_iterations) {
  Ascent out;
  const double n0 = c.norm();
  if (!(n0 > 0.0)) return out;
  c /= n0;
  auto objective = [&](const Vector& x, Vector* gradient) {
    const LogNorm num = log_lr_norm(grid, x, s);
    const LogNorm den = log_lr_norm(grid, x, q);
    if (gradient) *gradient = num.gradient - den.gradient;
    return num.value - den.value;
  };
  Vector g;
  double value = objective(c, &g);
  double tau = 1.0;
  int it = 0;
  for (; it < max_iterations; ++it) {
    const Vector tangent = g - g.dot(c) * c;
    if (!(tangent.norm() > 0.0)) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    Vector trial;
    double trial_value = kNegInf;
    for (int bt = 0; bt < 60; ++bt, tau *= 0.5) {
      trial = (c + tau * tangent).normalized();
      trial_value = objective(trial, nullptr);
      if (trial_value > value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.converged = true;
      break;
    }
    const double change = trial_value - value;
    c = std::move(trial);
    value = objective(c, &g);
    tau *= 2.0;
    if (change <= tol) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.log_value = value;
  out.c = std::move(c);
  out.iterations = it;
  return out;
}

EmbeddingResult best_of(std::vector<Ascent>& runs) {
  // Best by value, ties resolved by the lowest start index.
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (runs[i].log_value > runs[best].log_value) best = i;
  EmbeddingResult result;
  result.value = std::exp(runs[best].log_value);
  result.maximizer = std::move(runs[best].c);
  result.converged = runs[best].converged;
  result.iterations = runs[best].iterations;
  return result;
}

}  // namespace

double poincare_B7(const DomainGrid& grid) {
  const Matrix S = assemble_stiffness(grid, Diffusivity::constant(1.0));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  return 1.0 / eig.eigenvalues()(0);
}

EmbeddingResult embedding_K(const DomainGrid& grid, const Matrix& stiffness, double r,
                            const OptimizerSettings& settings, std::span<const Vector> extra_starts) {
  if (!(r >= 2.0)) throw std::invalid_argument("embedding_K: exponent must be >= 2");
  const int k = grid.n_modes();
  std::vector<Vector> starts;
  starts.push_back(Vector::Unit(k, 0));
  for (const Vector& s : extra_starts)
    if (s.size() == k && s.norm() > 0.0) starts.push_back(s);
  for (int i = 0; i < settings.restarts; ++i) {
    std::mt19937_64 rng(restart_seed(settings.seed, static_cast<std::uint64_t>(i)));
    starts.push_back(gaussian_direction(rng, k));
  }
  const Eigen::LDLT<Matrix> solver(stiffness);
  std::vector<Ascent> runs(starts.size());
  detail::parallel_for(static_cast<int>(starts.size()), settings.threads, [&](int i) {
    runs[i] = ascend_embedding(grid, stiffness, solver, r, starts[i], settings.tolerance,
                               settings.max_iterations);
  });
  return best_of(runs);
}

EmbeddingResult embedding_B6(const Problem& problem, const OptimizerSettings& settings) {
  const double q = problem.q();
  const double s = problem.p() + 2.0;
  if (!(s < q)) throw std::invalid_argument("embedding_B6: requires p + 2 < q");
  const DomainGrid& grid = problem.grid();
  const int k = grid.n_modes();
  std::vector<Vector> starts;
  starts.push_back(grid.project(Vector::Ones(grid.n_nodes())));  // the constant function
  starts.push_back(Vector::Unit(k, 0));
  for (int i = 0; i < settings.restarts; ++i) {
    std::mt19937_64 rng(restart_seed(settings.seed ^ 0xB6B6B6B6ULL, static_cast<std::uint64_t>(i)));
    starts.push_back(gaussian_direction(rng, k));
  }
  std::vector<Ascent> runs(starts.size());
  detail::parallel_for(static_cast<int>(starts.size()), settings.threads, [&](int i) {
    runs[i] = ascend_ratio(grid, s, q, starts[i], settings.tolerance, settings.max_iterations);
  });
  EmbeddingResult best = best_of(runs);
  // the ratio is ||u||_s / ||u||_q; B6 is its q-th power
  best.value = std::pow(best.value, q);
  return best;
}

double radius_r(double gamma, double K0, double mu0, double q) {
  const double log_r = (std::log(mu0 * std::numbers::e * gamma) - (q + gamma) * std::log(K0)) /
                       (q + gamma - 2.0);
  return std::exp(log_r);
}

double radius_rho(double gamma, double K1, double mu0, double q, double measure) {
  const double e = q + gamma - 2.0;
  const double log_rho = (std::log(mu0 * std::numbers::e * gamma) - (q + gamma) * std::log(K1)) / e +
                         gamma * std::log(measure) / (q * e);
  return std::exp(log_rho);
}

double rho_slope_numerator(double gamma, double K1, double mu0, double q, double measure) {
  const double lm = std::log(measure);
  return q * q + q * gamma - 2.0 * q - q * gamma * std::log(mu0 * std::numbers::e) -
         q * gamma * std::log(gamma) + 2.0 * q * gamma * std::log(K1) + q * gamma * lm -
         2.0 * gamma * lm;
}

std::vector<double> gamma_grid(double gamma_min, double gamma_max, int points) {
  if (!(gamma_min > 0.0) || !(gamma_max >= gamma_min) || points < 1)
    throw ConfigError("constants.gamma", "need 0 < gamma_min <= gamma_max and points >= 1");
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = gamma_min;
    return out;
  }
  const double lo = std::log(gamma_min), hi = std::log(gamma_max);
  for (int i = 0; i < points; ++i) out[i] = std::exp(lo + (hi - lo) * i / (points - 1));
  out.back() = gamma_max;
  return out;
}

std::pair<double, double> radius_sup(std::span<const double> gammas, std::span<const double> K0,
                                     double K1, double mu0, double q, double measure) {
  double r_best = 0.0, rho_best = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    r_best = std::max(r_best, radius_r(gammas[i], K0[i], mu0, q));
    rho_best = std::max(rho_best, radius_rho(gammas[i], K1, mu0, q, measure));
  }
  return {r_best, rho_best};
}

RadiusSupremum r_star(const Problem& problem, const GammaGridSettings& grid_settings,
                      const OptimizerSettings& settings) {
  const DomainGrid& grid = problem.grid();
  const Matrix& S = problem.stiffness();
  const double q = problem.q();
  const double mu0 = problem.coeff().mu0();
  const double measure = grid.length();

  RadiusSupremum out;
  const EmbeddingResult k1 = embedding_K(grid, S, q, settings);
  out.K1 = k1.value;
  out.K1_maximizer = k1.maximizer;
  out.approximate = !k1.converged;

  // Each gamma is optimized independently (in parallel); restarts inside
  // stay sequential so the split of work never changes the answer.
  OptimizerSettings inner = settings;
  inner.threads = 1;
  const std::vector<Vector> seeds{k1.maximizer};

  double gamma_max = grid_settings.gamma_max;
  for (int doubling = 0;; ++doubling) {
    out.gammas = gamma_grid(grid_settings.gamma_min, gamma_max, grid_settings.points);
    const int n = static_cast<int>(out.gammas.size());
    std::vector<EmbeddingResult> k0(n);
    detail::parallel_for(n, settings.threads, [&](int i) {
      k0[i] = embedding_K(grid, S, q + out.gammas[i], inner, seeds);
    });
    out.K0.assign(n, 0.0);
    out.r_values.assign(n, 0.0);
    out.rho_values.assign(n, 0.0);
    int arg_r = 0, arg_rho = 0;
    for (int i = 0; i < n; ++i) {
      out.K0[i] = k0[i].value;
      out.approximate = out.approximate || !k0[i].converged;
      out.r_values[i] = radius_r(out.gammas[i], out.K0[i], mu0, q);
      out.rho_values[i] = radius_rho(out.gammas[i], out.K1, mu0, q, measure);
      if (out.r_values[i] > out.r_values[arg_r]) arg_r = i;
      if (out.rho_values[i] > out.rho_values[arg_rho]) arg_rho = i;
    }
    out.r_star = out.r_values[arg_r];
    out.rho_star = out.rho_values[arg_rho];
    out.gamma_r = out.gammas[arg_r];
    out.gamma_rho = out.gammas[arg_rho];
    out.boundary = n > 1 && arg_r == n - 1;
    if (!out.boundary || doubling >= grid_settings.max_doublings) break;
    gamma_max *= 2.0;
  }
  return out;
}

double well_depth_M(double r_star, double mu0, double q) {
  return (q - 2.0) / (2.0 * q) * mu0 * r_star * r_star;
}

double mountain_pass_lambda(const Problem& problem, const Vector& u, double mu) {
  const FieldMoments m = field_moments(problem, u);
  if (!(m.a_uu > 0.0)) throw NumericalError("mountain_pass_lambda: u must be nonzero");
  if (!m.finite()) throw NumericalError("mountain_pass_lambda: moments overflow");
  const double q = problem.q();
  // I(e^s u) / e^{2s} = mu a - e^{(q-2)s} (log_moment + s ||u||_q^q)
  auto scaled_I = [&](double s) {
    return mu * m.a_uu - std::exp((q - 2.0) * s) * (m.log_moment + s * m.lq);
  };
  double lo = std::log(1e-12), hi = std::log(1e12);
  if (!(scaled_I(lo) > 0.0) || !(scaled_I(hi) < 0.0))
    throw NumericalError("mountain_pass_lambda: no sign change of I(lambda u) on [1e-12, 1e12]");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (scaled_I(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

NehariSample d_estimate(const Problem& problem, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw ConfigError("constants.d_samples", "must be >= 1");
  const int k = problem.n_modes();
  const double mu0 = problem.coeff().mu0();
  const double q = problem.q();
  const int pure = std::min(8, k);
  std::mt19937_64 rng(seed);
  NehariSample best;
  best.value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    const Vector u = i < pure ? Vector(Vector::Unit(k, i)) : gaussian_direction(rng, k);
    const double lambda = mountain_pass_lambda(problem, u, mu0);
    const Vector scaled = lambda * u;
    const FieldMoments m = field_moments(problem, scaled);
    const double J = 0.5 * mu0 * m.a_uu - m.log_moment / q + m.lq / (q * q);
    if (J < best.value) {
      best.value = J;
      best.argmin = i;
      best.direction = scaled;
    }
  }
  return best;
}

std::optional<double> theta_bound(double M, double E0, double q) {
  if (!(E0 > 0.0) || !(E0 < M)) return std::nullopt;
  return 1.0 - std::pow(M / E0, (2.0 - q) / q);
}

XiEstimate xi1_estimate(const Exponents& exponents, double mu0, double B6, double G0, double pairing,
                        int points_per_decade) {
  const double q = exponents.q, p = exponents.p;
  if (!(q > p + 2.0)) throw std::invalid_argument("xi1_estimate: requires q > p + 2");
  if (!(G0 > 0.0)) throw std::invalid_argument("xi1_estimate: requires G0 = -E(0) > 0");
  if (points_per_decade < 1) throw std::invalid_argument("xi1_estimate: points_per_decade >= 1");
  const double alpha = blowup_alpha(exponents);
  const double y_base = std::pow(G0, 1.0 - alpha);
  const int m = points_per_decade;
  XiEstimate best;
  bool found = false;
  for (int ke = -6 * m; ke <= 12 * m; ++ke) {
    const double eta = std::pow(10.0, static_cast<double>(ke) / m);
    const double eta_pow = std::pow(eta, -(p + 1.0));
    const double cond1 = 1.0 - eta_pow * B6;
    const double cond2 = q - eta_pow * (q - p - 2.0) / (q * (p + 2.0));
    if (!(cond1 > 0.0) || !(cond2 > 0.0)) continue;
    const double bracket = std::min({q / 2.0 + 1.0, 0.5 * (q - 2.0) * mu0, cond1, cond2});
    for (int kv = -12 * m; kv <= 0; ++kv) {
      const double eps = std::pow(10.0, static_cast<double>(kv) / m);
      const double cond3 = (1.0 - alpha) - eps * eta * (p + 1.0) / (p + 2.0);
      const double cond4 = y_base + eps * pairing;
      if (!(cond3 > 0.0) || !(cond4 > 0.0)) continue;
      const double xi1 = eps * bracket;
      if (!found || xi1 > best.xi1) {
        best = {eta, eps, xi1};
        found = true;
      }
    }
  }
  if (!found) throw NumericalError("xi1_estimate: no feasible (eta, eps) on the search grid");
  return best;
}

double xi_from_xi1(const XiEstimate& estimate, double alpha, double G0) {
  const double power = 1.0 / (1.0 - alpha);
  const double d = 1.0 + 1.0 / G0;
  const double xi3 = std::pow(2.0, power) * (1.0 + std::pow(estimate.eps, power) * d);
  return estimate.xi1 / xi3;
}

double blowup_time_bound(double Y0, double xi, double alpha) {
  if (!(Y0 > 0.0) || !(xi > 0.0) || !(alpha > 0.0 && alpha < 0.5))
    throw std::invalid_argument("blowup_time_bound: needs Y0 > 0, xi > 0, 0 < alpha < 1/2");
  return (1.0 - alpha) / (alpha * xi) * std::pow(Y0, -alpha / (1.0 - alpha));
}

double h1(double eps, const Thm52Constants& c) {
  return (c.p + 1.0) / (c.p + 2.0) *
         std::pow(c.B7 * c.B7 / (2.0 * eps * c.a0 * c.mu0), 1.0 / (c.p + 1.0));
}

double h2(double eps, const Thm52Constants& c) {
  const double half = c.q * (1.0 - eps) / 2.0;
  const double product = c.a0 * c.mu0 / c.B7 * (1.0 + half) * (half - 1.0);
  return 2.0 * std::sqrt(std::max(0.0, product));
}

double h3(double eps, const Thm52Constants& c) {
  return c.q * (1.0 - eps) / h2(eps, c);
}

EpsilonPrime epsilon_prime(const Thm52Constants& c) {
  if (!(c.q > c.p + 2.0) || !(c.p >= 0.0))
    throw std::invalid_argument("epsilon_prime: requires q > p + 2 >= 2");
  const double upper = 1.0 - 2.0 / c.q;
  const double margin = 1e-9 * upper;
  double lo = margin, hi = upper - margin;
  auto diff = [&](double e) { return h1(e, c) - h3(e, c); };
  const double f_lo = diff(lo), f_hi = diff(hi);
  if (!(f_lo > 0.0) || !(f_hi < 0.0)) {
    std::ostringstream msg;
    msg << "epsilon_prime: no sign change of h1 - h3 on [" << lo << ", " << hi << "]: values "
        << f_lo << ", " << f_hi;
    throw NumericalError(msg.str());
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (diff(mid) > 0.0 ? lo : hi) = mid;
  }
  // keep whichever endpoint has the smaller residual
  const double root = std::abs(diff(lo)) <= std::abs(diff(hi)) ? lo : hi;
  EpsilonPrime out;
  out.value = root;
  out.h1 = h1(root, c);
  out.h2 = h2(root, c);
  out.residual = diff(root);
  out.upper = upper;
  return out;
}

WellGeometry compute_geometry(const Problem& problem, const GeometrySettings& settings) {
  WellGeometry g;
  g.q = problem.q();
  g.p = problem.p();
  g.a0 = problem.coeff().a0();
  g.mu0 = problem.coeff().mu0();
  g.measure = problem.grid().length();
  g.B7 = poincare_B7(problem.grid());

  const RadiusSupremum sup = r_star(problem, settings.gamma, settings.optimizer);
  g.K1 = sup.K1;
  g.gamma_grid = sup.gammas;
  for (std::size_t i = 0; i < sup.gammas.size(); ++i) g.K0_samples.emplace_back(sup.gammas[i], sup.K0[i]);
  g.gamma_r = sup.gamma_r;
  g.r_star = sup.r_star;
  g.rho_star = sup.rho_star;
  g.boundary = sup.boundary;
  g.approximate = sup.approximate;
  g.M = well_depth_M(g.r_star, g.mu0, g.q);
  g.d_estimate = d_estimate(problem, settings.d_samples, settings.optimizer.seed).value;

  if (g.q > g.p + 2.0) {
    const EmbeddingResult b6 = embedding_B6(problem, settings.optimizer);
    g.B6 = b6.value;
    g.approximate = g.approximate || !b6.converged;
    g.eps_prime = epsilon_prime({g.q, g.p, g.a0, g.mu0, g.B7});
  }
  return g;
}

}  // namespace logwave
