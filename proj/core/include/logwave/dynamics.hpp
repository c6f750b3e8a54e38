#pragma once

// Time integration of the Galerkin system
//   u' = v,   v' = -mu(t) S u - P[g(v)] + P[f(u)],
// where P projects node values onto the sine basis (the mass matrix is the
// identity). Nonlinear terms are evaluated pseudo-spectrally on the
// over-resolved quadrature grid.

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "logwave/field.hpp"
#include "logwave/functionals.hpp"

namespace logwave {

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double dt_init = 1e-3;
  double dt_min = 1e-12;
  double dt_max = 0.1;
  double t_end = 10.0;
  double blowup_l2_threshold = 1e8;
  double record_every = 0.1;

  void validate() const;
};

enum class OutcomeFlag { completed, blowup_detected, step_underflow };

std::string_view to_string(OutcomeFlag flag) noexcept;
std::optional<OutcomeFlag> outcome_from_string(std::string_view name) noexcept;

struct BlowupReport {
  double t_detect = 0.0;  ///< lower bound on the blow-up time
  double l2 = 0.0;        ///< ||u||_2^2 at detection
  double growth_rate = 0.0;  ///< ln(l2 growth) / elapsed time over the last decade of l2
};

/// Initial profile for u0 or u1.
struct InitialShape {
  enum class Kind { zero, mode, gaussian, modal };

  Kind kind = Kind::zero;
  int mode = 1;
  double amplitude = 0.0;
  double center = 0.5;  ///< as a fraction of L
  double width = 0.1;   ///< as a fraction of L
  std::vector<double> coeffs;

  /// Modal coefficients on `grid` (Gaussians are projected; modal lists are
  /// truncated or zero-padded).
  Vector to_coeffs(const DomainGrid& grid) const;

  static InitialShape single_mode(int j, double amp) {
    InitialShape s;
    s.kind = Kind::mode;
    s.mode = j;
    s.amplitude = amp;
    return s;
  }
};

ModalState initial_state(const DomainGrid& grid, const InitialShape& u0, const InitialShape& u1);

struct StateDerivative {
  Vector du;
  Vector dv;
};

StateDerivative galerkin_rhs(const Problem& problem, const ModalState& state);

/// Watches ||u||_2^2 along accepted steps.
class BlowupMonitor {
 public:
  explicit BlowupMonitor(double threshold) : threshold_(threshold) {}

  void observe(double t, double l2);
  /// Report when the last observation crossed the threshold (or is not finite).
  std::optional<BlowupReport> check() const;
  /// Called when the step size underflows. Counts as blow-up when the trial
  /// steps went non-finite or ||u||_2^2 grew by 10x over the last tenth of
  /// the elapsed time.
  std::optional<BlowupReport> on_underflow(bool nonfinite_trials) const;

  double threshold() const noexcept { return threshold_; }

 private:
  BlowupReport report() const;

  double threshold_;
  std::vector<double> times_;
  std::vector<double> l2_;
};

/// First crossing of `threshold` in a recorded (t, l2) history.
std::optional<BlowupReport> detect_blowup(std::span<const EnergyRecord> records, double threshold);

struct Trajectory {
  std::vector<EnergyRecord> records;
  std::vector<ModalState> states_sampled;  ///< filled when requested, one per record
  OutcomeFlag outcome = OutcomeFlag::completed;
  std::optional<BlowupReport> blowup;
  ModalState final_state;
  int accepted_steps = 0;
  int rejected_steps = 0;
};

struct IntegrateOptions {
  /// Called for every record as soon as it is produced (CSV streaming).
  std::function<void(const EnergyRecord&)> on_record;
  bool keep_states = false;
  /// When set, Y = G^{1-alpha} + eps <u, u_t> is stored wherever G = -E > 0.
  std::optional<double> y_eps;
  std::optional<double> y_alpha;
};

/// Adaptive Dormand-Prince 5(4) integration of the Galerkin system. The
/// cumulative damping work and the mu' term are carried as two extra
/// components so the balance residual measures only the time-stepping error.
Trajectory integrate(const Problem& problem, const ModalState& initial,
                     const IntegratorConfig& config, const IntegrateOptions& options = {});

}  // namespace logwave
