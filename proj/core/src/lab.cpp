#include "logwave/lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace logwave {

std::string_view to_string(SetMembership m) noexcept {
  switch (m) {
    case SetMembership::W: return "W";
    case SetMembership::V_by_radius: return "V_by_radius";
    case SetMembership::V_by_energy: return "V_by_energy";
    case SetMembership::neither: return "neither";
  }
  return "neither";
}

std::string_view to_string(Prediction p) noexcept {
  switch (p) {
    case Prediction::global_decay_exponential: return "global_decay_exponential";
    case Prediction::global_decay_algebraic: return "global_decay_algebraic";
    case Prediction::global_subcritical: return "global_subcritical";
    case Prediction::blowup_thm51: return "blowup_thm51";
    case Prediction::blowup_thm52: return "blowup_thm52";
    case Prediction::no_prediction: return "no_prediction";
  }
  return "no_prediction";
}

std::optional<SetMembership> membership_from_string(std::string_view name) noexcept {
  for (auto m : {SetMembership::W, SetMembership::V_by_radius, SetMembership::V_by_energy,
                 SetMembership::neither})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

std::optional<Prediction> prediction_from_string(std::string_view name) noexcept {
  for (auto p : {Prediction::global_decay_exponential, Prediction::global_decay_algebraic,
                 Prediction::global_subcritical, Prediction::blowup_thm51, Prediction::blowup_thm52,
                 Prediction::no_prediction})
    if (to_string(p) == name) return p;
  return std::nullopt;
}

bool predicts_blowup(Prediction p) noexcept {
  return p == Prediction::blowup_thm51 || p == Prediction::blowup_thm52;
}

bool predicts_global(Prediction p) noexcept {
  return p == Prediction::global_decay_exponential || p == Prediction::global_decay_algebraic ||
         p == Prediction::global_subcritical;
}

std::optional<Thm52Hypothesis> verify_thm52_hypothesis(const Problem& problem, const ModalState& state0,
                                                       const WellGeometry& geometry) {
  if (!(problem.q() > problem.p() + 2.0) || !geometry.eps_prime) return std::nullopt;
  const double E0 = total_E(problem, state0);
  const double a = bilinear_a(state0.u, problem.stiffness());
  if (!(E0 > 0.0 && E0 < geometry.M && a > geometry.r_star * geometry.r_star)) return std::nullopt;
  const Thm52Constants c{geometry.q, geometry.p, geometry.a0, geometry.mu0, geometry.B7};
  Thm52Hypothesis out;
  out.eps_prime = geometry.eps_prime->value;
  out.lhs = state0.u.dot(state0.v);
  out.rhs = h1(out.eps_prime, c) * E0;
  out.holds = out.lhs > out.rhs;
  return out;
}

Classification classify(const Problem& problem, const ModalState& state0, const WellGeometry& geometry) {
  Classification c;
  c.E0 = total_E(problem, state0);
  c.a_u0u0 = bilinear_a(state0.u, problem.stiffness());
  c.M = geometry.M;
  c.r_star_sq = geometry.r_star * geometry.r_star;

  const bool nonzero = state0.u.squaredNorm() > 0.0;
  if (nonzero && c.a_u0u0 < c.r_star_sq && c.E0 > 0.0 && c.E0 < c.M)
    c.set_membership = SetMembership::W;
  else if (nonzero && c.a_u0u0 > c.r_star_sq && c.E0 > 0.0 && c.E0 < c.M)
    c.set_membership = SetMembership::V_by_radius;
  else if (nonzero && c.E0 <= 0.0)
    c.set_membership = SetMembership::V_by_energy;

  const auto thm52 = verify_thm52_hypothesis(problem, state0, geometry);
  if (thm52) {
    c.thm52_lhs = thm52->lhs;
    c.thm52_rhs = thm52->rhs;
  }

  const double q = problem.q(), p = problem.p();
  if (q < p + 2.0)
    c.predicted = Prediction::global_subcritical;
  else if (c.set_membership == SetMembership::W)
    c.predicted = p == 0.0 ? Prediction::global_decay_exponential : Prediction::global_decay_algebraic;
  else if (c.set_membership == SetMembership::V_by_energy && q > p + 2.0)
    c.predicted = Prediction::blowup_thm51;
  else if (c.set_membership == SetMembership::V_by_radius && thm52 && thm52->holds)
    c.predicted = Prediction::blowup_thm52;
  return c;
}

std::string_view to_string(DecayModel m) noexcept {
  switch (m) {
    case DecayModel::exponential: return "exponential";
    case DecayModel::algebraic_2_over_p: return "algebraic_2_over_p";
    case DecayModel::algebraic_2_over_p_plus_2: return "algebraic_2_over_p_plus_2";
  }
  return "exponential";
}

std::optional<DecayModel> decay_model_from_string(std::string_view name) noexcept {
  for (auto m : {DecayModel::exponential, DecayModel::algebraic_2_over_p,
                 DecayModel::algebraic_2_over_p_plus_2})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

std::pair<double, double> tail_window(std::span<const EnergyRecord> records, double window_fraction) {
  if (records.empty()) return {0.0, 0.0};
  const double t_end = records.back().t;
  if (t_end <= 1.0) return {records.front().t, t_end};
  return {t_end - window_fraction * (t_end - 1.0), t_end};
}

DecayFit fit_model(std::span<const EnergyRecord> records, DecayModel model, double p,
                   double window_fraction) {
  DecayFit fit;
  fit.model = model;
  fit.window = tail_window(records, window_fraction);
  const double eps_t = 1e-12 * std::max(1.0, fit.window.second);

  double power = 0.0;
  if (model == DecayModel::algebraic_2_over_p) {
    if (!(p > 0.0)) {
      fit.applicable = false;
      fit.note = "requires p > 0";
      return fit;
    }
    power = p / 2.0;
  } else if (model == DecayModel::algebraic_2_over_p_plus_2) {
    power = (p + 2.0) / 2.0;
  }

  std::vector<double> xs, ys;
  for (const EnergyRecord& r : records) {
    if (r.t < fit.window.first - eps_t) continue;
    if (!(r.E > 0.0)) {
      fit.applicable = false;
      fit.note = "E <= 0 in window";
      return fit;
    }
    xs.push_back(r.t);
    ys.push_back(model == DecayModel::exponential ? std::log(r.E) : std::pow(r.E, -power));
  }
  fit.n_points = static_cast<int>(xs.size());
  if (fit.n_points < 3) {
    fit.applicable = false;
    fit.note = "fewer than 3 records in window";
    return fit;
  }

  const double n = fit.n_points;
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < fit.n_points; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < fit.n_points; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  fit.intercept = my - slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < fit.n_points; ++i) {
    const double e = ys[i] - (fit.intercept + slope * xs[i]);
    ss_res += e * e;
  }
  // A constant series is fitted exactly by slope 0.
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.goodness = std::clamp(std::isfinite(r2) ? r2 : 0.0, 0.0, 1.0);
  fit.rate_or_slope = model == DecayModel::exponential ? -slope : slope;
  return fit;
}

std::vector<DecayFit> fit_decay(std::span<const EnergyRecord> records, double p, double window_fraction) {
  if (p == 0.0) return {fit_model(records, DecayModel::exponential, p, window_fraction)};
  return {fit_model(records, DecayModel::algebraic_2_over_p, p, window_fraction),
          fit_model(records, DecayModel::algebraic_2_over_p_plus_2, p, window_fraction)};
}

std::optional<std::size_t> best_fit(std::span<const DecayFit> fits) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (!fits[i].applicable) continue;
    if (!best || fits[i].goodness > fits[*best].goodness) best = i;
  }
  return best;
}

std::string_view to_string(ObservedRegime r) noexcept {
  switch (r) {
    case ObservedRegime::global: return "global";
    case ObservedRegime::blowup: return "blowup";
    case ObservedRegime::growth: return "growth";
    case ObservedRegime::underflow: return "underflow";
  }
  return "global";
}

bool superlinear_growth(std::span<const EnergyRecord> records) {
  if (records.size() < 2) return false;
  const double t_end = records.back().t;
  const double t0 = records.front().t + (t_end - records.front().t) / 10.0;
  const EnergyRecord* first = nullptr;
  double prev = -std::numeric_limits<double>::infinity();
  for (const EnergyRecord& r : records) {
    if (r.t < t0) continue;
    if (!first) first = &r;
    if (r.l2_u < prev) return false;
    prev = r.l2_u;
  }
  return first && first != &records.back() && records.back().l2_u > 10.0 * first->l2_u;
}

ObservedRegime observe(const Trajectory& trajectory) {
  if (trajectory.outcome == OutcomeFlag::blowup_detected) return ObservedRegime::blowup;
  if (trajectory.outcome == OutcomeFlag::step_underflow) return ObservedRegime::underflow;
  if (superlinear_growth(trajectory.records)) return ObservedRegime::growth;
  return ObservedRegime::global;
}

bool prediction_matches(Prediction predicted, ObservedRegime observed) noexcept {
  if (predicts_global(predicted)) return observed == ObservedRegime::global;
  if (predicts_blowup(predicted))
    return observed == ObservedRegime::blowup || observed == ObservedRegime::growth;
  return true;
}

bool AuditReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(),
                     [](const AuditCheck& c) { return !c.applicable || c.passed; });
}

const AuditCheck* AuditReport::find(std::string_view name) const noexcept {
  for (const AuditCheck& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

/// Accumulates the worst margin of a check over the records.
struct MarginTracker {
  AuditCheck check;

  explicit MarginTracker(std::string name, bool applicable) {
    check.name = std::move(name);
    check.applicable = applicable;
    check.margin = std::numeric_limits<double>::infinity();
  }

  void add(double t, double margin) {
    if (margin < check.margin) {
      check.margin = margin;
      check.worst_t = t;
    }
  }

  AuditCheck finish(bool strict = false) {
    if (!check.applicable || !std::isfinite(check.margin)) {
      if (!std::isfinite(check.margin)) check.margin = 0.0;
      check.passed = true;
      return check;
    }
    check.passed = strict ? check.margin > 0.0 : check.margin >= 0.0;
    return check;
  }
};

}  // namespace

AuditReport audit(const Problem& problem, std::span<const EnergyRecord> records,
                  const Classification& classification, const WellGeometry& geometry,
                  const AuditSettings& settings) {
  AuditReport report;
  const double E0 = records.empty() ? 0.0 : records.front().E;

  MarginTracker mono("energy_monotone", true);
  const double slack = 10.0 * settings.rel_tol * std::max(1.0, std::abs(E0));
  double running_min = std::numeric_limits<double>::infinity();
  for (const EnergyRecord& r : records) {
    if (std::isfinite(running_min)) mono.add(r.t, running_min + slack - r.E);
    running_min = std::min(running_min, r.E);
  }
  report.checks.push_back(mono.finish());

  MarginTracker balance("balance_bound", true);
  for (const EnergyRecord& r : records) {
    const double scale = std::max({1.0, std::abs(E0), std::abs(r.E), r.dissipated, std::abs(r.mu_work)});
    const double bound = settings.balance_constant * settings.rel_tol * (r.t - records.front().t) * scale;
    balance.add(r.t, bound - std::abs(r.balance_residual));
  }
  report.checks.push_back(balance.finish());

  const bool in_w = classification.set_membership == SetMembership::W;
  MarginTracker confine("w_confinement", in_w);
  if (in_w)
    for (const EnergyRecord& r : records) confine.add(r.t, classification.r_star_sq - r.a_uu);
  report.checks.push_back(confine.finish(true));

  const bool in_v = classification.set_membership == SetMembership::V_by_radius ||
                    classification.set_membership == SetMembership::V_by_energy;
  MarginTracker persist("v_persistence", in_v);
  if (in_v)
    for (const EnergyRecord& r : records) persist.add(r.t, std::min(-r.F, -r.I));
  report.checks.push_back(persist.finish(true));

  const auto theta = in_w ? theta_bound(geometry.M, classification.E0, problem.q()) : std::nullopt;
  MarginTracker theta_check("theta_bound", theta.has_value());
  if (theta)
    for (const EnergyRecord& r : records) {
      const double mu = problem.coeff().mu(r.t);
      theta_check.add(r.t, r.I - *theta * mu * r.a_uu + settings.theta_slack);
    }
  report.checks.push_back(theta_check.finish());
  return report;
}

}  // namespace logwave
