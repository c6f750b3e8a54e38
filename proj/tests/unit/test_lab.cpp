#include <doctest.h>

#include <cmath>
#include <map>

#include "logwave/lab.hpp"
#include "oracles.hpp"

using namespace logwave;

namespace {

Problem make_problem(double q, double p, int k = 12, int n_cells = 0) {
  GridOptions go;
  go.n_modes = k;
  go.n_cells = n_cells;
  Exponents ex;
  ex.q = q;
  ex.p = p;
  return Problem(DomainGrid(go), Diffusivity::constant(1.0), TimeCoefficient::exp_decay(2.0, 1.0, 1.0), ex);
}

// Geometry is the expensive part; share it across test cases.
const WellGeometry& geometry_for(double q, double p) {
  static std::map<std::pair<double, double>, WellGeometry> cache;
  const auto key = std::make_pair(q, p);
  auto it = cache.find(key);
  if (it == cache.end()) {
    GeometrySettings s;
    s.gamma.points = 24;
    s.optimizer.restarts = 6;
    s.d_samples = 24;
    it = cache.emplace(key, compute_geometry(make_problem(q, p), s)).first;
  }
  return it->second;
}

ModalState with_u(const Vector& u, const Vector& v) { return {0.0, u, v}; }

Vector w(int j, double amp, int k = 12) { return amp * Vector::Unit(k, j - 1); }

std::vector<EnergyRecord> synthetic(double (*E)(double), double t_end, double dt) {
  std::vector<EnergyRecord> out;
  for (int i = 0; i * dt <= t_end + 1e-12; ++i) {
    EnergyRecord r;
    r.t = i * dt;
    r.E = E(r.t);
    out.push_back(r);
  }
  return out;
}

// Amplitude A > lambda_*(w1) with J(A w1) = target, by bisection on the
// decreasing branch of the fibering map.
double amplitude_on_descent(const Problem& problem, double target) {
  const double mu0 = problem.coeff().mu0();
  const double start = mountain_pass_lambda(problem, w(1, 1.0), mu0);
  auto J = [&](double a) { return potential_J(problem, w(1, a), 0.0); };
  double lo = start, hi = start;
  while (J(hi) > target) hi *= 1.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (J(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("enum names round-trip") {
  for (auto m : {SetMembership::W, SetMembership::V_by_radius, SetMembership::V_by_energy, SetMembership::neither})
    CHECK(membership_from_string(to_string(m)) == m);
  for (auto p : {Prediction::global_decay_exponential, Prediction::global_decay_algebraic,
                 Prediction::global_subcritical, Prediction::blowup_thm51, Prediction::blowup_thm52,
                 Prediction::no_prediction})
    CHECK(prediction_from_string(to_string(p)) == p);
  for (auto m : {DecayModel::exponential, DecayModel::algebraic_2_over_p, DecayModel::algebraic_2_over_p_plus_2})
    CHECK(decay_model_from_string(to_string(m)) == m);
  CHECK_FALSE(prediction_from_string("maybe").has_value());
  CHECK(predicts_blowup(Prediction::blowup_thm52));
  CHECK_FALSE(predicts_blowup(Prediction::no_prediction));
  CHECK(predicts_global(Prediction::global_subcritical));
  CHECK_FALSE(predicts_global(Prediction::blowup_thm51));
}

TEST_CASE("tiny data lies in W and decays") {
  const Vector zero = Vector::Zero(12);
  const Classification c0 = classify(make_problem(3.0, 0.0), with_u(w(1, 1e-6), zero), geometry_for(3.0, 0.0));
  CHECK(c0.set_membership == SetMembership::W);
  CHECK(c0.predicted == Prediction::global_decay_exponential);
  CHECK(c0.E0 > 0.0);
  CHECK(c0.E0 < c0.M);
  CHECK(c0.a_u0u0 < c0.r_star_sq);
  CHECK(c0.r_star_sq == doctest::Approx(std::pow(geometry_for(3.0, 0.0).r_star, 2)));
  CHECK_FALSE(c0.thm52_lhs.has_value());

  const Classification c1 = classify(make_problem(4.0, 1.0), with_u(w(1, 1e-6), zero), geometry_for(4.0, 1.0));
  CHECK(c1.set_membership == SetMembership::W);
  CHECK(c1.predicted == Prediction::global_decay_algebraic);
}

TEST_CASE("non-positive energy with q > p + 2 predicts Theorem 5.1 blow-up") {
  const Problem problem = make_problem(3.0, 0.0);
  const ModalState s = with_u(w(1, 10.0), Vector::Zero(12));
  REQUIRE(total_E(problem, s) <= 0.0);
  const Classification c = classify(problem, s, geometry_for(3.0, 0.0));
  CHECK(c.set_membership == SetMembership::V_by_energy);
  CHECK(c.predicted == Prediction::blowup_thm51);
}

TEST_CASE("q < p + 2 predicts subcritical global existence for any data") {
  const Problem problem = make_problem(3.0, 2.0);
  for (double amp : {1e-6, 1.0, 10.0, 100.0}) {
    const Classification c = classify(problem, with_u(w(1, amp), Vector::Zero(12)), geometry_for(3.0, 2.0));
    CHECK(c.predicted == Prediction::global_subcritical);
  }
}

TEST_CASE("q = p + 2 with negative energy has no prediction") {
  const Problem problem = make_problem(3.0, 1.0);
  const Classification c = classify(problem, with_u(w(1, 10.0), Vector::Zero(12)), geometry_for(3.0, 1.0));
  CHECK(c.set_membership == SetMembership::V_by_energy);
  CHECK(c.predicted == Prediction::no_prediction);
}

TEST_CASE("energy above the well or a zero displacement is neither") {
  const Problem problem = make_problem(3.0, 0.0);
  const WellGeometry& g = geometry_for(3.0, 0.0);
  const Classification hot = classify(problem, with_u(w(1, 1e-3), w(1, 10.0)), g);
  CHECK(hot.E0 >= hot.M);
  CHECK(hot.set_membership == SetMembership::neither);
  CHECK(hot.predicted == Prediction::no_prediction);
  const Classification still = classify(problem, with_u(Vector::Zero(12), w(2, 0.01)), g);
  CHECK(still.set_membership == SetMembership::neither);
}

TEST_CASE("Theorem 5.2 hypothesis") {
  const Problem problem = make_problem(3.0, 0.0);
  const WellGeometry& g = geometry_for(3.0, 0.0);
  const double amp = amplitude_on_descent(problem, 0.5 * g.M);
  const Vector u0 = w(1, amp);
  REQUIRE(bilinear_a(u0, problem.stiffness()) > g.r_star * g.r_star);

  SUBCASE("orthogonal velocity never satisfies it") {
    const ModalState s = with_u(u0, w(2, 0.05));
    const auto h = verify_thm52_hypothesis(problem, s, g);
    REQUIRE(h.has_value());
    CHECK(h->lhs == 0.0);
    CHECK(h->rhs > 0.0);
    CHECK_FALSE(h->holds);
    CHECK(h->eps_prime == g.eps_prime->value);
    const Classification c = classify(problem, s, g);
    CHECK(c.set_membership == SetMembership::V_by_radius);
    CHECK(c.predicted == Prediction::no_prediction);
    CHECK(c.thm52_lhs == h->lhs);
    CHECK(c.thm52_rhs == h->rhs);
  }

  SUBCASE("u1 = c u0: both sides reported, prediction follows the comparison") {
    int holds = 0;
    for (double c = 0.005; c <= 2.0; c *= 1.25) {
      const ModalState s = with_u(u0, c * u0);
      const auto h = verify_thm52_hypothesis(problem, s, g);
      if (!h) continue;  // E(0) left (0, M)
      const Thm52Constants k{g.q, g.p, g.a0, g.mu0, g.B7};
      CHECK(h->lhs == doctest::Approx(c * u0.squaredNorm()));
      CHECK(h->rhs == doctest::Approx(h1(g.eps_prime->value, k) * total_E(problem, s)));
      CHECK(h->holds == (h->lhs > h->rhs));
      const Classification cl = classify(problem, s, g);
      CHECK(cl.predicted == (h->holds ? Prediction::blowup_thm52 : Prediction::no_prediction));
      holds += h->holds;
    }
    CHECK(holds > 0);
  }

  SUBCASE("reproducible across calls and quadrature refinement") {
    const double c = std::sqrt(0.5 * g.M) / amp;  // kinetic energy M/4
    const ModalState s = with_u(u0, c * u0);
    const auto a = verify_thm52_hypothesis(problem, s, g);
    const auto b = verify_thm52_hypothesis(problem, s, g);
    REQUIRE(a.has_value());
    CHECK(a->lhs == b->lhs);
    CHECK(a->rhs == b->rhs);
    const Problem refined = make_problem(3.0, 0.0, 12, 48);
    const auto r = verify_thm52_hypothesis(refined, s, g);
    REQUIRE(r.has_value());
    CHECK(r->lhs == doctest::Approx(a->lhs).epsilon(1e-6));
    CHECK(r->rhs == doctest::Approx(a->rhs).epsilon(1e-6));
  }

  SUBCASE("inapplicable outside its preconditions") {
    CHECK_FALSE(verify_thm52_hypothesis(problem, with_u(w(1, 1e-3), Vector::Zero(12)), g).has_value());
    CHECK_FALSE(verify_thm52_hypothesis(problem, with_u(w(1, 10.0), Vector::Zero(12)), g).has_value());
    const Problem sub = make_problem(3.0, 2.0);
    CHECK_FALSE(verify_thm52_hypothesis(sub, with_u(u0, 0.3 * u0), geometry_for(3.0, 2.0)).has_value());
  }
}

TEST_CASE("classify is pure") {
  const Problem problem = make_problem(3.0, 0.0);
  const ModalState s = with_u(w(1, 0.7) + w(3, 0.1), w(2, 0.2));
  const Classification a = classify(problem, s, geometry_for(3.0, 0.0));
  const Classification b = classify(problem, s, geometry_for(3.0, 0.0));
  CHECK(a.set_membership == b.set_membership);
  CHECK(a.predicted == b.predicted);
  CHECK(a.E0 == b.E0);
  CHECK(a.a_u0u0 == b.a_u0u0);
  CHECK(a.thm52_lhs == b.thm52_lhs);
  CHECK(a.thm52_rhs == b.thm52_rhs);
}

TEST_CASE("tail window") {
  const auto recs = synthetic([](double) { return 1.0; }, 10.0, 0.5);
  const auto win = tail_window(recs, 0.5);
  CHECK(win.first == doctest::Approx(5.5));
  CHECK(win.second == 10.0);
  const auto short_run = synthetic([](double) { return 1.0; }, 0.8, 0.1);
  CHECK(tail_window(short_run, 0.5).first == 0.0);
  CHECK(tail_window({}, 0.5) == std::make_pair(0.0, 0.0));
}

TEST_CASE("decay fits on synthetic oracles") {
  const auto expo = synthetic([](double t) { return std::exp(-2.0 * t); }, 10.0, 0.1);
  const DecayFit fe = fit_model(expo, DecayModel::exponential, 0.0);
  CHECK(fe.applicable);
  CHECK(fe.rate_or_slope == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(fe.goodness > 1.0 - 1e-9);
  CHECK(fe.n_points == 46);
  CHECK(fe.window.first == doctest::Approx(5.5));

  const auto alg = synthetic([](double t) { return 1.0 / (1.0 + t); }, 10.0, 0.1);
  const DecayFit fa = fit_model(alg, DecayModel::algebraic_2_over_p, 2.0);
  CHECK(fa.applicable);
  CHECK(fa.rate_or_slope == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fa.intercept == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fa.goodness > 1.0 - 1e-9);

  // E^{-2} = (1+t)^2 is not linear in t
  const DecayFit fb = fit_model(alg, DecayModel::algebraic_2_over_p_plus_2, 2.0);
  CHECK(fb.applicable);
  CHECK(fb.goodness < fa.goodness);

  const auto flat = synthetic([](double) { return 0.3; }, 10.0, 0.1);
  const DecayFit ff = fit_model(flat, DecayModel::exponential, 0.0);
  CHECK(std::abs(ff.rate_or_slope) < 1e-12);
  CHECK(ff.goodness >= 0.0);
  CHECK(ff.goodness <= 1.0);

  const auto crossing = synthetic([](double t) { return 5.0 - t; }, 10.0, 0.1);
  const DecayFit fc = fit_model(crossing, DecayModel::exponential, 0.0);
  CHECK_FALSE(fc.applicable);
  CHECK(fc.note.find("E <= 0") != std::string::npos);

  CHECK_FALSE(fit_model(expo, DecayModel::algebraic_2_over_p, 0.0).applicable);
  const auto sparse = synthetic([](double t) { return std::exp(-t); }, 10.0, 4.0);
  CHECK_FALSE(fit_model(sparse, DecayModel::exponential, 0.0).applicable);
}

TEST_CASE("fit_decay chooses the models by p and best_fit picks the better one") {
  const auto alg = synthetic([](double t) { return 1.0 / (1.0 + t); }, 10.0, 0.1);
  const auto fits = fit_decay(alg, 2.0);
  REQUIRE(fits.size() == 2);
  CHECK(fits[0].model == DecayModel::algebraic_2_over_p);
  CHECK(fits[1].model == DecayModel::algebraic_2_over_p_plus_2);
  CHECK(best_fit(fits) == 0u);
  const auto expo = synthetic([](double t) { return std::exp(-t); }, 10.0, 0.1);
  const auto one = fit_decay(expo, 0.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].model == DecayModel::exponential);
  std::vector<DecayFit> none(2);
  none[0].applicable = none[1].applicable = false;
  CHECK_FALSE(best_fit(none).has_value());
}

TEST_CASE("observed regime and matching") {
  std::vector<EnergyRecord> rec(11);
  for (int i = 0; i <= 10; ++i) {
    rec[i].t = i;
    rec[i].l2_u = std::exp(static_cast<double>(i));
  }
  CHECK(superlinear_growth(rec));
  Trajectory tr;
  tr.records = rec;
  CHECK(observe(tr) == ObservedRegime::growth);
  rec[7].l2_u = 1.0;  // a dip breaks monotonicity
  CHECK_FALSE(superlinear_growth(rec));
  for (auto& r : rec) r.l2_u = 1.0;
  tr.records = rec;
  CHECK(observe(tr) == ObservedRegime::global);
  tr.outcome = OutcomeFlag::blowup_detected;
  CHECK(observe(tr) == ObservedRegime::blowup);
  tr.outcome = OutcomeFlag::step_underflow;
  CHECK(observe(tr) == ObservedRegime::underflow);

  CHECK(prediction_matches(Prediction::global_decay_exponential, ObservedRegime::global));
  CHECK_FALSE(prediction_matches(Prediction::global_subcritical, ObservedRegime::blowup));
  CHECK(prediction_matches(Prediction::blowup_thm52, ObservedRegime::growth));
  CHECK(prediction_matches(Prediction::blowup_thm51, ObservedRegime::blowup));
  CHECK_FALSE(prediction_matches(Prediction::blowup_thm51, ObservedRegime::global));
  CHECK(prediction_matches(Prediction::no_prediction, ObservedRegime::underflow));
}

TEST_CASE("audit of a zero trajectory passes trivially") {
  const Problem problem = make_problem(3.0, 0.0);
  IntegratorConfig cfg;
  cfg.t_end = 2.0;
  const Trajectory tr = integrate(problem, ModalState::zero(12), cfg);
  const Classification c = classify(problem, ModalState::zero(12), geometry_for(3.0, 0.0));
  const AuditReport report = audit(problem, tr.records, c, geometry_for(3.0, 0.0));
  CHECK(report.passed());
  REQUIRE(report.checks.size() == 5);
  for (const char* name : {"energy_monotone", "balance_bound", "w_confinement", "v_persistence", "theta_bound"})
    CHECK(report.find(name) != nullptr);
  CHECK_FALSE(report.find("w_confinement")->applicable);
  CHECK(report.find("nonexistent") == nullptr);
}

TEST_CASE("audit of a W-start run and a corrupted copy") {
  const Problem problem = make_problem(3.0, 0.0);
  const WellGeometry& g = geometry_for(3.0, 0.0);
  const ModalState s0 = with_u(w(1, 0.3), Vector::Zero(12));
  const Classification c = classify(problem, s0, g);
  REQUIRE(c.set_membership == SetMembership::W);
  IntegratorConfig cfg;
  cfg.t_end = 10.0;
  const Trajectory tr = integrate(problem, s0, cfg);
  REQUIRE(tr.outcome == OutcomeFlag::completed);
  AuditSettings settings;
  settings.rel_tol = cfg.rel_tol;
  const AuditReport report = audit(problem, tr.records, c, g, settings);
  CHECK(report.passed());
  const AuditCheck* confine = report.find("w_confinement");
  CHECK(confine->applicable);
  CHECK(confine->margin > 0.0);
  double max_a = 0.0;
  for (const EnergyRecord& r : tr.records) max_a = std::max(max_a, r.a_uu);
  CHECK(confine->margin == doctest::Approx(c.r_star_sq - max_a));
  CHECK(report.find("theta_bound")->applicable);
  CHECK(report.find("theta_bound")->passed);
  CHECK_FALSE(report.find("v_persistence")->applicable);

  std::vector<EnergyRecord> corrupted = tr.records;
  corrupted[20].E += 1e-3;
  const AuditReport bad = audit(problem, corrupted, c, g, settings);
  CHECK_FALSE(bad.passed());
  CHECK_FALSE(bad.find("energy_monotone")->passed);
  CHECK(bad.find("energy_monotone")->worst_t == doctest::Approx(corrupted[20].t));
  CHECK(bad.find("energy_monotone")->margin < 0.0);
}

TEST_CASE("v_persistence flags a record with positive F") {
  const Problem problem = make_problem(3.0, 0.0);
  Classification c;
  c.set_membership = SetMembership::V_by_energy;
  std::vector<EnergyRecord> rec(3);
  for (int i = 0; i < 3; ++i) {
    rec[i].t = i;
    rec[i].F = -1.0;
    rec[i].I = -2.0;
  }
  CHECK(audit(problem, rec, c, geometry_for(3.0, 0.0)).find("v_persistence")->passed);
  rec[1].F = 0.5;
  const AuditCheck* v = audit(problem, rec, c, geometry_for(3.0, 0.0)).find("v_persistence");
  CHECK_FALSE(v->passed);
  CHECK(v->worst_t == 1.0);
}
