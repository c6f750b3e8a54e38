#pragma once

// Scalar functionals on discrete states: the logarithmic source and damping
// nonlinearities, norms, the Nehari functional I, potential J, energy E,
// the dissipation rate, the blow-up functionals F and Y, and the
// energy-balance residual.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logwave/error.hpp"
#include "logwave/field.hpp"

namespace logwave {

/// Source exponent q (2 < q; the 1D critical exponent is +inf), damping
/// exponent p >= 0, and the damping growth constants c1 > 1/(p+2), c2.
struct Exponents {
  double q = 3.0;
  double p = 0.0;
  double c1 = 1.0;
  double c2 = 1.0;

  /// Throws ConfigError naming the offending "problem.*" key.
  void validate() const;
};

/// f(u) = |u|^{q-2} u log|u|, extended by f(0) = 0.
double log_source(double u, double q) noexcept;

/// F(u) = |u|^q log|u| with the same extension; the integrand of the log moment.
double log_density(double u, double q) noexcept;

/// g(v) = |v|^p v.
double damping(double v, double p) noexcept;

/// The damping law g. The default is the polynomial family |s|^p s; a
/// custom monotone odd function can be supplied instead.
class DampingLaw {
 public:
  explicit DampingLaw(double p = 0.0) : p_(p) {}
  DampingLaw(double p, std::function<double(double)> custom) : p_(p), custom_(std::move(custom)) {}

  double operator()(double v) const { return custom_ ? custom_(v) : damping(v, p_); }
  double p() const noexcept { return p_; }
  bool is_power_law() const noexcept { return !custom_; }

 private:
  double p_;
  std::function<double(double)> custom_;
};

/// Everything needed to evaluate the PDE on the discrete space. Immutable.
class Problem {
 public:
  Problem(DomainGrid grid, Diffusivity diffusivity, TimeCoefficient mu, Exponents exponents,
          double horizon = 100.0);
  /// `with_source = false` drops the logarithmic source everywhere (dynamics
  /// and functionals); used for linear reference problems.
  Problem(DomainGrid grid, Diffusivity diffusivity, TimeCoefficient mu, Exponents exponents,
          DampingLaw damping, double horizon = 100.0, bool with_source = true);

  const DomainGrid& grid() const noexcept { return grid_; }
  const CoefficientField& coeff() const noexcept { return coeff_; }
  const Matrix& stiffness() const noexcept { return stiffness_; }
  const Exponents& exponents() const noexcept { return exponents_; }
  const DampingLaw& damping_law() const noexcept { return damping_; }
  int n_modes() const noexcept { return grid_.n_modes(); }
  double q() const noexcept { return exponents_.q; }
  double p() const noexcept { return exponents_.p; }
  bool has_source() const noexcept { return with_source_; }

 private:
  DomainGrid grid_;
  CoefficientField coeff_;
  Matrix stiffness_;
  Exponents exponents_;
  DampingLaw damping_;
  bool with_source_;
};

/// Quadrature moments of u needed by every functional.
struct FieldMoments {
  double l2 = 0.0;          ///< ||u||_2^2
  double lq = 0.0;          ///< ||u||_q^q
  double log_moment = 0.0;  ///< ∫ |u|^q log|u|
  double a_uu = 0.0;        ///< a(u, u)

  bool finite() const noexcept;
};

/// Thrown when a functional is evaluated on a state so large that the
/// quadrature overflows (the blow-up range).
class BlowupRangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

FieldMoments field_moments(const Problem& problem, const Vector& u);

double nehari_I(const Problem& problem, const Vector& u, double t);
double potential_J(const Problem& problem, const Vector& u, double t);
double total_E(const Problem& problem, const ModalState& state);
double blowup_F(const Problem& problem, const Vector& u, double t);

/// dE/dt = ½ mu'(t) a(u,u) - ∫ g(u_t) u_t.
double dissipation_rate(const Problem& problem, const ModalState& state);

/// ∫ g(u_t) u_t over the domain.
double damping_power(const Problem& problem, const Vector& v);

/// alpha = (q - p - 2) / (q (p + 1)).
double blowup_alpha(const Exponents& exponents) noexcept;

/// Y = G^{1-alpha} + eps <u, u_t>; nullopt when G <= 0.
std::optional<double> auxiliary_Y(const ModalState& state, double G, double eps, double alpha);

/// Snapshot of every tracked functional at one instant.
///
/// `dissipated` = ∫_0^t ∫ g(u_t) u_t and `mu_work` = ½ ∫_0^t mu' a(u,u)
/// are the cumulative integrals behind `balance_residual`; they are not
/// part of the CSV row.
struct EnergyRecord {
  double t = 0.0;
  double E = 0.0;
  double I = 0.0;
  double J = 0.0;
  double F = 0.0;
  std::optional<double> Y;
  double l2_u = 0.0;
  double l2_v = 0.0;
  double lq_u = 0.0;
  double a_uu = 0.0;
  double log_moment = 0.0;
  double damping_power = 0.0;
  double balance_residual = 0.0;
  double dissipated = 0.0;
  double mu_work = 0.0;
};

EnergyRecord make_record(const Problem& problem, const ModalState& state);

/// E(t) + ∫∫ g(u_t) u_t - ½ ∫ mu' a(u,u) - E(0) for each record.
std::vector<double> balance_residual(std::span<const EnergyRecord> records);

/// Fixed column order t,E,I,J,F,Y,l2_u,l2_v,lq_u,a_uu,log_moment,damping_power,balance_residual.
std::string csv_header();
std::string to_csv_row(const EnergyRecord& record);
/// Inverse of to_csv_row for the serialized columns.
EnergyRecord parse_csv_row(const std::string& line);

}  // namespace logwave
