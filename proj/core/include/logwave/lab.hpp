#pragma once

// Analysis of initial data and trajectories: stable/unstable set membership,
// the regime each theorem predicts, decay-rate fits, and invariant audits.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logwave/dynamics.hpp"
#include "logwave/functionals.hpp"
#include "logwave/varconst.hpp"

namespace logwave {

enum class SetMembership { W, V_by_radius, V_by_energy, neither };

enum class Prediction {
  global_decay_exponential,
  global_decay_algebraic,
  global_subcritical,
  blowup_thm51,
  blowup_thm52,
  no_prediction,
};

std::string_view to_string(SetMembership m) noexcept;
std::string_view to_string(Prediction p) noexcept;
std::optional<SetMembership> membership_from_string(std::string_view name) noexcept;
std::optional<Prediction> prediction_from_string(std::string_view name) noexcept;

bool predicts_blowup(Prediction p) noexcept;
bool predicts_global(Prediction p) noexcept;

struct Classification {
  SetMembership set_membership = SetMembership::neither;
  double E0 = 0.0;
  double a_u0u0 = 0.0;
  double M = 0.0;
  double r_star_sq = 0.0;
  Prediction predicted = Prediction::no_prediction;
  std::optional<double> thm52_lhs;
  std::optional<double> thm52_rhs;
};

/// Both sides of the positive-energy blow-up hypothesis <u0,u1> > h1(eps') E(0).
struct Thm52Hypothesis {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  double eps_prime = 0.0;
};

/// nullopt unless q > p + 2, 0 < E(0) < M and a(u0,u0) > r_*^2.
std::optional<Thm52Hypothesis> verify_thm52_hypothesis(const Problem& problem, const ModalState& state0,
                                                       const WellGeometry& geometry);

/// Set membership at t = 0 and the theorem that applies. Checked in order:
/// q < p + 2 (global_subcritical), W (decay), E(0) <= 0 (Theorem 5.1),
/// the radius branch of V with the Theorem 5.2 hypothesis, else no_prediction.
Classification classify(const Problem& problem, const ModalState& state0, const WellGeometry& geometry);

enum class DecayModel { exponential, algebraic_2_over_p, algebraic_2_over_p_plus_2 };

std::string_view to_string(DecayModel m) noexcept;
std::optional<DecayModel> decay_model_from_string(std::string_view name) noexcept;

struct DecayFit {
  DecayModel model = DecayModel::exponential;
  /// Decay rate k for exponential fits (log E = c - k t); slope of E^{-s} vs t otherwise.
  double rate_or_slope = 0.0;
  double intercept = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  double goodness = 0.0;  ///< coefficient of determination, clamped to [0, 1]
  int n_points = 0;
  bool applicable = true;
  std::string note;  ///< why the fit is inapplicable, if it is
};

/// Records with t in the last `window_fraction` of [1, t_end] (all records
/// when t_end <= 1).
std::pair<double, double> tail_window(std::span<const EnergyRecord> records, double window_fraction);

DecayFit fit_model(std::span<const EnergyRecord> records, DecayModel model, double p,
                   double window_fraction = 0.5);

/// Exponential fit when p = 0; both algebraic variants when p > 0.
std::vector<DecayFit> fit_decay(std::span<const EnergyRecord> records, double p,
                                double window_fraction = 0.5);

/// Index of the applicable fit with the largest goodness, or nullopt.
std::optional<std::size_t> best_fit(std::span<const DecayFit> fits);

/// What a trajectory actually did.
enum class ObservedRegime { global, blowup, growth, underflow };

std::string_view to_string(ObservedRegime r) noexcept;

/// ||u||_2^2 nondecreasing on [t_end/10, t_end] with at least a tenfold rise.
bool superlinear_growth(std::span<const EnergyRecord> records);

ObservedRegime observe(const Trajectory& trajectory);

/// Global predictions match `global`; blow-up predictions match `blowup` or
/// `growth`; no_prediction matches anything.
bool prediction_matches(Prediction predicted, ObservedRegime observed) noexcept;

struct AuditCheck {
  std::string name;
  bool applicable = true;
  bool passed = true;
  double margin = 0.0;  ///< worst case over the records; negative on failure
  double worst_t = 0.0;
};

struct AuditReport {
  std::vector<AuditCheck> checks;

  bool passed() const noexcept;
  const AuditCheck* find(std::string_view name) const noexcept;
};

struct AuditSettings {
  double rel_tol = 1e-8;
  double balance_constant = 100.0;
  double theta_slack = 1e-8;
};

/// Checks: energy_monotone, balance_bound, w_confinement, v_persistence,
/// theta_bound. Inapplicable checks are listed with applicable = false.
AuditReport audit(const Problem& problem, std::span<const EnergyRecord> records,
                  const Classification& classification, const WellGeometry& geometry,
                  const AuditSettings& settings = {});

}  // namespace logwave
