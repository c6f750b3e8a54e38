#include "logwave/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "logwave/error.hpp"

namespace logwave {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0)) throw ConfigError("integrator.rel_tol", "must be > 0");
  if (!(abs_tol > 0.0)) throw ConfigError("integrator.abs_tol", "must be > 0");
  if (!(dt_min > 0.0)) throw ConfigError("integrator.dt_min", "must be > 0");
  if (!(dt_min < dt_init)) throw ConfigError("integrator.dt_init", "must exceed dt_min");
  if (!(dt_init <= dt_max)) throw ConfigError("integrator.dt_max", "must be >= dt_init");
  if (!(t_end > 0.0)) throw ConfigError("integrator.t_end", "must be > 0");
  if (!(blowup_l2_threshold > 0.0)) throw ConfigError("integrator.blowup_l2_threshold", "must be > 0");
  if (!(record_every > 0.0)) throw ConfigError("integrator.record_every", "must be > 0");
}

std::string_view to_string(OutcomeFlag flag) noexcept {
  switch (flag) {
    case OutcomeFlag::completed: return "completed";
    case OutcomeFlag::blowup_detected: return "blowup_detected";
    case OutcomeFlag::step_underflow: return "step_underflow";
  }
  return "completed";
}

std::optional<OutcomeFlag> outcome_from_string(std::string_view name) noexcept {
  for (OutcomeFlag f : {OutcomeFlag::completed, OutcomeFlag::blowup_detected, OutcomeFlag::step_underflow})
    if (to_string(f) == name) return f;
  return std::nullopt;
}

Vector InitialShape::to_coeffs(const DomainGrid& grid) const {
  const int k = grid.n_modes();
  Vector c = Vector::Zero(k);
  switch (kind) {
    case Kind::zero:
      break;
    case Kind::mode:
      if (mode < 1 || mode > k) throw ConfigError("initial.mode", "mode index outside 1..n_modes");
      c[mode - 1] = amplitude;
      break;
    case Kind::gaussian: {
      if (!(width > 0.0)) throw ConfigError("initial.width", "must be > 0");
      const double L = grid.length();
      Vector values(grid.n_nodes());
      for (int i = 0; i < grid.n_nodes(); ++i) {
        const double z = (grid.nodes()[i] - center * L) / (width * L);
        values[i] = amplitude * std::exp(-0.5 * z * z);
      }
      c = grid.project(values);
      break;
    }
    case Kind::modal:
      for (int j = 0; j < std::min<int>(k, static_cast<int>(coeffs.size())); ++j) c[j] = coeffs[j];
      break;
  }
  return c;
}

ModalState initial_state(const DomainGrid& grid, const InitialShape& u0, const InitialShape& u1) {
  return {0.0, u0.to_coeffs(grid), u1.to_coeffs(grid)};
}

namespace {

/// Right-hand side of the augmented first-order system
/// y = [u, v, dissipated, mu_work].
class GalerkinSystem {
 public:
  explicit GalerkinSystem(const Problem& problem)
      : problem_(problem),
        k_(problem.n_modes()),
        uv_(k_, 2),
        nodal_(problem.grid().n_nodes(), 2),
        forcing_(problem.grid().n_nodes()) {}

  int size() const { return 2 * k_ + 2; }

  void operator()(double t, const Vector& y, Vector& dydt) {
    const DomainGrid& grid = problem_.grid();
    const Vector& w = grid.weights();
    const double q = problem_.q();
    const bool source = problem_.has_source();
    const DampingLaw& g = problem_.damping_law();

    uv_.col(0) = y.head(k_);
    uv_.col(1) = y.segment(k_, k_);
    nodal_.noalias() = grid.basis() * uv_;
    double power = 0.0;
    for (int i = 0; i < nodal_.rows(); ++i) {
      const double u = nodal_(i, 0), v = nodal_(i, 1);
      const double gv = g(v);
      power += w[i] * gv * v;
      forcing_[i] = w[i] * ((source ? log_source(u, q) : 0.0) - gv);
    }
    const double mu = problem_.coeff().mu(t);
    su_.noalias() = problem_.stiffness() * uv_.col(0);
    dydt.resize(size());
    dydt.head(k_) = uv_.col(1);
    dydt.segment(k_, k_).noalias() = grid.basis().transpose() * forcing_;
    dydt.segment(k_, k_) -= mu * su_;
    dydt[2 * k_] = power;
    dydt[2 * k_ + 1] = 0.5 * problem_.coeff().mu_prime(t) * uv_.col(0).dot(su_);
  }

 private:
  const Problem& problem_;
  int k_;
  Matrix uv_;
  Matrix nodal_;
  Vector forcing_;
  Vector su_;
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool all_finite(const Vector& x) { return x.allFinite(); }

}  // namespace

StateDerivative galerkin_rhs(const Problem& problem, const ModalState& state) {
  const int k = problem.n_modes();
  if (state.u.size() != k || state.v.size() != k)
    throw std::invalid_argument("galerkin_rhs: state size does not match n_modes");
  GalerkinSystem system(problem);
  Vector y(system.size());
  y << state.u, state.v, 0.0, 0.0;
  Vector dydt;
  system(state.t, y, dydt);
  if (!all_finite(dydt)) throw BlowupRangeError("galerkin_rhs: non-finite value at a quadrature node");
  return {dydt.head(k), dydt.segment(k, k)};
}

void BlowupMonitor::observe(double t, double l2) {
  times_.push_back(t);
  l2_.push_back(l2);
}

BlowupReport BlowupMonitor::report() const {
  BlowupReport r;
  r.t_detect = times_.back();
  r.l2 = l2_.back();
  // rate over the last decade of growth in l2
  const double target = r.l2 / 10.0;
  for (std::size_t i = l2_.size(); i-- > 0;) {
    if (l2_[i] <= target && times_[i] < r.t_detect) {
      r.growth_rate = std::log(r.l2 / l2_[i]) / (r.t_detect - times_[i]);
      break;
    }
  }
  return r;
}

std::optional<BlowupReport> BlowupMonitor::check() const {
  if (l2_.empty()) return std::nullopt;
  const double last = l2_.back();
  if (std::isfinite(last) && last <= threshold_) return std::nullopt;
  return report();
}

std::optional<BlowupReport> BlowupMonitor::on_underflow(bool nonfinite_trials) const {
  if (l2_.empty()) return std::nullopt;
  if (nonfinite_trials) return report();
  const double t_last = times_.back();
  const double window_start = 0.9 * t_last;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (times_[i] >= window_start) {
      if (l2_.back() >= 10.0 * std::max(l2_[i], 1e-300)) return report();
      break;
    }
  }
  return std::nullopt;
}

std::optional<BlowupReport> detect_blowup(std::span<const EnergyRecord> records, double threshold) {
  BlowupMonitor monitor(threshold);
  for (const EnergyRecord& r : records) {
    monitor.observe(r.t, r.l2_u);
    if (auto report = monitor.check()) return report;
  }
  return std::nullopt;
}

Trajectory integrate(const Problem& problem, const ModalState& initial, const IntegratorConfig& config,
                     const IntegrateOptions& options) {
  config.validate();
  const int k = problem.n_modes();
  if (initial.u.size() != k || initial.v.size() != k)
    throw std::invalid_argument("integrate: initial state size does not match n_modes");
  if (!initial.u.allFinite() || !initial.v.allFinite())
    throw std::invalid_argument("integrate: initial state has non-finite coefficients");

  GalerkinSystem system(problem);
  const int n = system.size();
  Trajectory traj;

  // The fastest linear mode bounds the explicit step.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(problem.stiffness(), Eigen::EigenvaluesOnly);
  const double omega_max = std::sqrt(problem.coeff().mu(0.0) * eig.eigenvalues().maxCoeff());
  const double dt_cap = std::min(config.dt_max, 0.5 / omega_max);

  Vector y(n);
  y << initial.u, initial.v, 0.0, 0.0;
  double t = initial.t;
  const double t_end = initial.t + config.t_end;
  double e0 = 0.0;

  auto state_of = [&](double time, const Vector& yy) {
    return ModalState{time, yy.head(k), yy.segment(k, k)};
  };
  auto emit = [&](double time, const Vector& yy) {
    const ModalState s = state_of(time, yy);
    EnergyRecord rec = make_record(problem, s);
    rec.dissipated = yy[2 * k];
    rec.mu_work = yy[2 * k + 1];
    if (traj.records.empty()) e0 = rec.E;
    rec.balance_residual = rec.E + rec.dissipated - rec.mu_work - e0;
    if (options.y_eps && options.y_alpha) rec.Y = auxiliary_Y(s, -rec.E, *options.y_eps, *options.y_alpha);
    if (!traj.records.empty() && !(time > traj.records.back().t)) return;
    traj.records.push_back(rec);
    if (options.keep_states) traj.states_sampled.push_back(s);
    if (options.on_record) options.on_record(rec);
  };

  BlowupMonitor monitor(config.blowup_l2_threshold);
  monitor.observe(t, y.head(k).squaredNorm());
  emit(t, y);
  if (auto report = monitor.check()) {
    traj.outcome = OutcomeFlag::blowup_detected;
    traj.blowup = report;
    traj.final_state = state_of(t, y);
    return traj;
  }

  int record_index = 1;
  auto next_record_time = [&] {
    return std::min(t_end, initial.t + record_index * config.record_every);
  };

  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  system(t, y, k1);
  double h = std::min(config.dt_init, dt_cap);
  bool nonfinite_trials = false;
  double err_prev = 1e-4;

  while (t < t_end) {
    const double t_rec = next_record_time();
    bool lands_on_record = false;
    double step = h;
    if (t + step >= t_rec || t_rec - (t + step) < 1e-12 * std::max(1.0, std::abs(t_rec))) {
      step = t_rec - t;
      lands_on_record = true;
    }

    ytmp = y + step * a21 * k1;
    system(t + c2 * step, ytmp, k2);
    ytmp = y + step * (a31 * k1 + a32 * k2);
    system(t + c3 * step, ytmp, k3);
    ytmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
    system(t + c4 * step, ytmp, k4);
    ytmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    system(t + c5 * step, ytmp, k5);
    ytmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    system(t + step, ytmp, k6);
    ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    system(t + step, ynew, k7);
    err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err_norm = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc = config.abs_tol + config.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = err[i] / sc;
      err_norm += r * r;
    }
    err_norm = std::sqrt(err_norm / n);
    const bool finite = std::isfinite(err_norm) && all_finite(ynew) && all_finite(k7);
    if (!finite) nonfinite_trials = true;

    if (finite && err_norm <= 1.0) {
      t = lands_on_record ? t_rec : t + step;
      y.swap(ynew);
      k1.swap(k7);
      ++traj.accepted_steps;
      nonfinite_trials = false;

      // PI step-size controller (Hairer-Wanner, beta = 0.04)
      const double e = std::max(err_norm, 1e-10);
      double factor = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.04);
      factor = std::clamp(factor, 0.2, 5.0);
      err_prev = e;
      if (!lands_on_record || step >= h) h = std::min(step * factor, dt_cap);

      const double l2 = y.head(k).squaredNorm();
      monitor.observe(t, l2);
      if (auto report = monitor.check()) {
        emit(t, y);
        traj.outcome = OutcomeFlag::blowup_detected;
        traj.blowup = report;
        break;
      }
      if (lands_on_record) {
        emit(t, y);
        ++record_index;
      }
    } else {
      ++traj.rejected_steps;
      const double factor = finite ? std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.9) : 0.25;
      h = step * factor;
      if (h < config.dt_min) {
        if (auto report = monitor.on_underflow(nonfinite_trials)) {
          traj.outcome = OutcomeFlag::blowup_detected;
          traj.blowup = report;
        } else {
          traj.outcome = OutcomeFlag::step_underflow;
        }
        if (traj.records.back().t < t) emit(t, y);
        break;
      }
    }
  }
  traj.final_state = state_of(t, y);
  return traj;
}

}  // namespace logwave
