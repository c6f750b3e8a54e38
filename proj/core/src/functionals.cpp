#include "logwave/functionals.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace logwave {

void Exponents::validate() const {
  if (!std::isfinite(q) || !(q > 2.0)) throw ConfigError("problem.q", "source exponent must satisfy q > 2");
  if (!std::isfinite(p) || !(p >= 0.0)) throw ConfigError("problem.p", "damping exponent must satisfy p >= 0");
  if (!(c1 > 1.0 / (p + 2.0))) throw ConfigError("problem.c1", "must satisfy c1 > 1/(p+2)");
  if (!(c2 >= c1)) throw ConfigError("problem.c2", "must satisfy c2 >= c1");
}

double log_source(double u, double q) noexcept {
  if (u == 0.0) return 0.0;
  const double a = std::abs(u);
  const double la = std::log(a);
  return std::copysign(std::exp((q - 1.0) * la), u) * la;
}

double log_density(double u, double q) noexcept {
  if (u == 0.0) return 0.0;
  const double la = std::log(std::abs(u));
  return std::exp(q * la) * la;
}

double damping(double v, double p) noexcept {
  if (p == 0.0) return v;
  if (p == 1.0) return std::abs(v) * v;
  if (p == 2.0) return v * v * v;
  if (v == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(v), p + 1.0), v);
}

Problem::Problem(DomainGrid grid, Diffusivity diffusivity, TimeCoefficient mu, Exponents exponents,
                 double horizon)
    : Problem(std::move(grid), diffusivity, mu, exponents, DampingLaw(exponents.p), horizon) {}

Problem::Problem(DomainGrid grid, Diffusivity diffusivity, TimeCoefficient mu, Exponents exponents,
                 DampingLaw damping, double horizon, bool with_source)
    : grid_(std::move(grid)),
      coeff_(grid_, diffusivity, mu, horizon),
      stiffness_(assemble_stiffness(grid_, coeff_)),
      exponents_(exponents),
      damping_(std::move(damping)),
      with_source_(with_source) {
  exponents_.validate();
}

bool FieldMoments::finite() const noexcept {
  return std::isfinite(l2) && std::isfinite(lq) && std::isfinite(log_moment) && std::isfinite(a_uu);
}

FieldMoments field_moments(const Problem& problem, const Vector& u) {
  const DomainGrid& grid = problem.grid();
  const Vector values = grid.evaluate_at_nodes(u);
  const Vector& w = grid.weights();
  const double q = problem.q();
  FieldMoments m;
  m.l2 = u.squaredNorm();
  m.a_uu = bilinear_a(u, problem.stiffness());
  if (!problem.has_source()) return m;
  for (int i = 0; i < values.size(); ++i) {
    const double x = values[i];
    if (x == 0.0) continue;
    const double la = std::log(std::abs(x));
    const double power = std::exp(q * la);
    m.lq += w[i] * power;
    m.log_moment += w[i] * power * la;
  }
  return m;
}

namespace {

FieldMoments checked_moments(const Problem& problem, const Vector& u) {
  FieldMoments m = field_moments(problem, u);
  if (!m.finite()) throw BlowupRangeError("functional evaluation overflowed (blow-up range)");
  return m;
}

double nehari_from(const FieldMoments& m, double mu) { return mu * m.a_uu - m.log_moment; }

double potential_from(const FieldMoments& m, double mu, double q) {
  return 0.5 * mu * m.a_uu - m.log_moment / q + m.lq / (q * q);
}

}  // namespace

double nehari_I(const Problem& problem, const Vector& u, double t) {
  return nehari_from(checked_moments(problem, u), problem.coeff().mu(t));
}

double potential_J(const Problem& problem, const Vector& u, double t) {
  return potential_from(checked_moments(problem, u), problem.coeff().mu(t), problem.q());
}

double total_E(const Problem& problem, const ModalState& state) {
  return 0.5 * state.v.squaredNorm() + potential_J(problem, state.u, state.t);
}

double blowup_F(const Problem& problem, const Vector& u, double t) {
  const FieldMoments m = checked_moments(problem, u);
  return m.lq / problem.q() + nehari_from(m, problem.coeff().mu(t));
}

double damping_power(const Problem& problem, const Vector& v) {
  const Vector values = problem.grid().evaluate_at_nodes(v);
  const Vector& w = problem.grid().weights();
  const DampingLaw& g = problem.damping_law();
  double total = 0.0;
  for (int i = 0; i < values.size(); ++i) total += w[i] * g(values[i]) * values[i];
  return total;
}

double dissipation_rate(const Problem& problem, const ModalState& state) {
  const double a = bilinear_a(state.u, problem.stiffness());
  return 0.5 * problem.coeff().mu_prime(state.t) * a - damping_power(problem, state.v);
}

double blowup_alpha(const Exponents& exponents) noexcept {
  return (exponents.q - exponents.p - 2.0) / (exponents.q * (exponents.p + 1.0));
}

std::optional<double> auxiliary_Y(const ModalState& state, double G, double eps, double alpha) {
  if (!(G > 0.0)) return std::nullopt;
  return std::pow(G, 1.0 - alpha) + eps * state.u.dot(state.v);
}

EnergyRecord make_record(const Problem& problem, const ModalState& state) {
  const FieldMoments m = field_moments(problem, state.u);
  const double mu = problem.coeff().mu(state.t);
  const double q = problem.q();
  EnergyRecord r;
  r.t = state.t;
  r.l2_u = m.l2;
  r.l2_v = state.v.squaredNorm();
  r.lq_u = m.lq;
  r.a_uu = m.a_uu;
  r.log_moment = m.log_moment;
  r.I = nehari_from(m, mu);
  r.J = potential_from(m, mu, q);
  r.E = 0.5 * r.l2_v + r.J;
  r.F = m.lq / q + r.I;
  r.damping_power = damping_power(problem, state.v);
  return r;
}

std::vector<double> balance_residual(std::span<const EnergyRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  if (records.empty()) return out;
  const EnergyRecord& first = records.front();
  const double e0 = first.E + first.dissipated - first.mu_work;
  for (const EnergyRecord& r : records) out.push_back(r.E + r.dissipated - r.mu_work - e0);
  return out;
}

std::string csv_header() {
  return "t,E,I,J,F,Y,l2_u,l2_v,lq_u,a_uu,log_moment,damping_power,balance_residual";
}

namespace {

void append_number(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

}  // namespace

std::string to_csv_row(const EnergyRecord& r) {
  std::string out;
  out.reserve(256);
  const double before_y[] = {r.t, r.E, r.I, r.J, r.F};
  for (double x : before_y) {
    append_number(out, x);
    out += ',';
  }
  if (r.Y) append_number(out, *r.Y);
  const double after_y[] = {r.l2_u, r.l2_v, r.lq_u, r.a_uu, r.log_moment, r.damping_power,
                            r.balance_residual};
  for (double x : after_y) {
    out += ',';
    append_number(out, x);
  }
  return out;
}

EnergyRecord parse_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  if (cells.size() != 13) throw ConfigError("trajectory", "expected 13 CSV columns, got " + std::to_string(cells.size()));
  auto num = [&](int i) {
    try {
      return std::stod(cells[i]);
    } catch (const std::exception&) {
      throw ConfigError("trajectory", "unparsable number '" + cells[i] + "'");
    }
  };
  EnergyRecord r;
  r.t = num(0);
  r.E = num(1);
  r.I = num(2);
  r.J = num(3);
  r.F = num(4);
  if (!cells[5].empty()) r.Y = num(5);
  r.l2_u = num(6);
  r.l2_v = num(7);
  r.lq_u = num(8);
  r.a_uu = num(9);
  r.log_moment = num(10);
  r.damping_power = num(11);
  r.balance_residual = num(12);
  return r;
}

}  // namespace logwave
