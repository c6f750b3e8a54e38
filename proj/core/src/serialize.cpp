#include "logwave/serialize.hpp"

#include <cstdio>

namespace logwave {

namespace {

Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

}  // namespace

Json to_json(const EpsilonPrime& eps) {
  return Json{{"value", eps.value}, {"h1", eps.h1}, {"h2", eps.h2}, {"residual", eps.residual},
              {"upper", eps.upper}};
}

Json to_json(const WellGeometry& g) {
  Json k0 = Json::array();
  for (const auto& [gamma, K0] : g.K0_samples) k0.push_back(Json{{"gamma", gamma}, {"K0", K0}});
  return Json{
      {"q", g.q},
      {"p", g.p},
      {"a0", g.a0},
      {"mu0", g.mu0},
      {"measure", g.measure},
      {"B7", g.B7},
      {"K1", g.K1},
      {"K0_samples", k0},
      {"gamma_r", g.gamma_r},
      {"r_star", g.r_star},
      {"rho_star", g.rho_star},
      {"M", g.M},
      {"d_estimate", g.d_estimate},
      {"B6", optional_number(g.B6)},
      {"eps_prime", g.eps_prime ? to_json(*g.eps_prime) : Json(nullptr)},
      {"boundary", g.boundary},
      {"approximate", g.approximate},
  };
}

Json geometry_digest(const WellGeometry& g) {
  return Json{
      {"B7", g.B7},
      {"K1", g.K1},
      {"r_star", g.r_star},
      {"rho_star", g.rho_star},
      {"M", g.M},
      {"d_estimate", g.d_estimate},
      {"B6", optional_number(g.B6)},
      {"eps_prime", g.eps_prime ? Json(g.eps_prime->value) : Json(nullptr)},
      {"boundary", g.boundary},
      {"approximate", g.approximate},
  };
}

std::string geometry_text(const WellGeometry& g) {
  std::string out;
  auto line = [&](const char* key, double value) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-12s %.10g\n", key, value);
    out += buf;
  };
  line("q", g.q);
  line("p", g.p);
  line("a0", g.a0);
  line("mu0", g.mu0);
  line("B7", g.B7);
  line("K1", g.K1);
  line("gamma_r", g.gamma_r);
  line("r_star", g.r_star);
  line("rho_star", g.rho_star);
  line("M", g.M);
  line("d_estimate", g.d_estimate);
  if (g.B6) line("B6", *g.B6);
  if (g.eps_prime) {
    line("eps_prime", g.eps_prime->value);
    line("h1(eps')", g.eps_prime->h1);
  }
  if (g.boundary) out += "note         sup of r(gamma) at the grid edge\n";
  if (g.approximate) out += "note         some optimizer runs did not converge\n";
  return out;
}

Json to_json(const Classification& c) {
  return Json{
      {"set_membership", std::string(to_string(c.set_membership))},
      {"E0", c.E0},
      {"a_u0u0", c.a_u0u0},
      {"M", c.M},
      {"r_star_sq", c.r_star_sq},
      {"predicted", std::string(to_string(c.predicted))},
      {"thm52_lhs", optional_number(c.thm52_lhs)},
      {"thm52_rhs", optional_number(c.thm52_rhs)},
  };
}

Json to_json(const DecayFit& fit) {
  Json j{
      {"model", std::string(to_string(fit.model))},
      {"rate_or_slope", fit.rate_or_slope},
      {"intercept", fit.intercept},
      {"window", Json::array({fit.window.first, fit.window.second})},
      {"goodness", fit.goodness},
      {"n_points", fit.n_points},
      {"applicable", fit.applicable},
  };
  if (!fit.note.empty()) j["note"] = fit.note;
  return j;
}

Json to_json(const AuditCheck& check) {
  return Json{{"name", check.name},       {"applicable", check.applicable}, {"passed", check.passed},
              {"margin", check.margin},   {"worst_t", check.worst_t}};
}

Json to_json(const AuditReport& report) {
  Json checks = Json::array();
  for (const AuditCheck& c : report.checks) checks.push_back(to_json(c));
  return Json{{"passed", report.passed()}, {"checks", checks}};
}

Json to_json(const BlowupReport& report) {
  return Json{{"t_detect", report.t_detect}, {"l2", report.l2}, {"growth_rate", report.growth_rate}};
}

}  // namespace logwave
