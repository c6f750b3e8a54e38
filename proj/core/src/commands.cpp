#include "logwave/commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "logwave/error.hpp"
#include "parallel.hpp"

namespace fs = std::filesystem;

namespace logwave {

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json fits_json(const std::vector<DecayFit>& fits) {
  Json arr = Json::array();
  for (const DecayFit& f : fits) arr.push_back(to_json(f));
  return arr;
}

/// The negative-energy blow-up bound T* for the run, when it applies.
Json thm51_bound(const Problem& problem, const ModalState& s0, const Classification& c,
                 const WellGeometry& g) {
  if (c.predicted != Prediction::blowup_thm51 || !g.B6 || !(c.E0 < 0.0)) return nullptr;
  try {
    const double G0 = -c.E0;
    const double pairing = s0.u.dot(s0.v);
    const XiEstimate est = xi1_estimate(problem.exponents(), g.mu0, *g.B6, G0, pairing);
    const double alpha = blowup_alpha(problem.exponents());
    const double xi = xi_from_xi1(est, alpha, G0);
    const double Y0 = *auxiliary_Y(s0, G0, est.eps, alpha);
    return Json{{"eta", est.eta}, {"eps", est.eps}, {"xi", xi}, {"alpha", alpha},
                {"Y0", Y0},       {"T_star", blowup_time_bound(Y0, xi, alpha)}};
  } catch (const std::exception& e) {
    return Json{{"error", e.what()}};
  }
}

}  // namespace

SimulationResult run_simulation(const RunConfig& config, const Problem& problem,
                                const WellGeometry& geometry, const std::optional<fs::path>& out_dir) {
  SimulationResult res;
  const ModalState s0 = build_initial_state(problem, config);
  res.classification = classify(problem, s0, geometry);
  const Json bound = thm51_bound(problem, s0, res.classification, geometry);

  IntegrateOptions opts;
  if (bound.is_object() && bound.contains("eps")) {
    opts.y_eps = bound["eps"].get<double>();
    opts.y_alpha = bound["alpha"].get<double>();
  }
  std::ofstream csv;
  if (out_dir) {
    fs::create_directories(*out_dir);
    csv.open(*out_dir / "trajectory.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + (*out_dir / "trajectory.csv").string());
    csv << csv_header() << '\n';
    opts.on_record = [&csv](const EnergyRecord& r) { csv << to_csv_row(r) << '\n'; };
  }
  res.trajectory = integrate(problem, s0, config.integrator, opts);
  if (csv.is_open()) csv.close();

  res.observed = observe(res.trajectory);
  if (res.trajectory.outcome == OutcomeFlag::completed)
    res.fits = fit_decay(res.trajectory.records, problem.p(), config.window_fraction);
  res.audit = audit(problem, res.trajectory.records, res.classification, geometry,
                    AuditSettings{config.integrator.rel_tol});

  Json fits = fits_json(res.fits);
  const auto best = best_fit(res.fits);
  res.summary = Json{
      {"config_echo", config_to_json(config)},
      {"classification", to_json(res.classification)},
      {"outcome_flag", std::string(to_string(res.trajectory.outcome))},
      {"t_detect", res.trajectory.blowup ? Json(res.trajectory.blowup->t_detect) : Json(nullptr)},
      {"fits", fits},
      {"geometry_digest", geometry_digest(geometry)},
      {"predicted", std::string(to_string(res.classification.predicted))},
      {"observed", std::string(to_string(res.observed))},
      {"prediction_matches", prediction_matches(res.classification.predicted, res.observed)},
      {"best_fit", best ? Json(std::string(to_string(res.fits[*best].model))) : Json(nullptr)},
      {"blowup", res.trajectory.blowup ? to_json(*res.trajectory.blowup) : Json(nullptr)},
      {"thm51_bound", bound},
      {"accepted_steps", res.trajectory.accepted_steps},
      {"rejected_steps", res.trajectory.rejected_steps},
  };
  if (out_dir) {
    write_file(*out_dir / "summary.json", dump(res.summary));
    write_file(*out_dir / "audit.json", dump(to_json(res.audit)));
  }
  return res;
}

std::string summary_table(const SimulationResult& r) {
  std::string out;
  char buf[160];
  auto row = [&](const char* key, const std::string& value) {
    std::snprintf(buf, sizeof buf, "%-20s %s\n", key, value.c_str());
    out += buf;
  };
  auto num = [&](double x) {
    char b[40];
    std::snprintf(b, sizeof b, "%.6g", x);
    return std::string(b);
  };
  const Classification& c = r.classification;
  row("set_membership", std::string(to_string(c.set_membership)));
  row("E0", num(c.E0));
  row("a(u0,u0)", num(c.a_u0u0));
  row("M", num(c.M));
  row("r_star^2", num(c.r_star_sq));
  if (c.thm52_lhs) row("thm52 lhs / rhs", num(*c.thm52_lhs) + " / " + num(*c.thm52_rhs));
  row("predicted", std::string(to_string(c.predicted)));
  row("outcome", std::string(to_string(r.trajectory.outcome)));
  row("observed", std::string(to_string(r.observed)));
  if (r.trajectory.blowup) row("t_detect", num(r.trajectory.blowup->t_detect));
  for (const DecayFit& f : r.fits)
    row(("fit " + std::string(to_string(f.model))).c_str(),
        f.applicable ? num(f.rate_or_slope) + " (R^2 " + num(f.goodness) + ")" : "n/a: " + f.note);
  for (const AuditCheck& a : r.audit.checks)
    row(("audit " + a.name).c_str(),
        !a.applicable ? "n/a" : std::string(a.passed ? "pass" : "FAIL") + " margin " + num(a.margin));
  return out;
}

std::vector<EnergyRecord> read_trajectory_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("trajectory", "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != csv_header())
    throw ConfigError("trajectory", "unexpected CSV header in " + path.string());
  std::vector<EnergyRecord> records;
  while (std::getline(in, line))
    if (!line.empty()) records.push_back(parse_csv_row(line));
  return records;
}

int cmd_constants(const RunConfig& config, std::ostream& out) {
  const Problem problem = build_problem(config);
  const WellGeometry g = compute_geometry(problem, config.constants);
  const fs::path dir = config.output.directory;
  fs::create_directories(dir);
  write_file(dir / "constants.json", dump(to_json(g)));
  out << geometry_text(g);
  return 0;
}

int cmd_simulate(const RunConfig& config, std::ostream& out) {
  const Problem problem = build_problem(config);
  const WellGeometry g = compute_geometry(problem, config.constants);
  const SimulationResult r = run_simulation(config, problem, g, fs::path(config.output.directory));
  out << summary_table(r);
  return 0;
}

int cmd_classify(const RunConfig& config, std::ostream& out) {
  const Problem problem = build_problem(config);
  const WellGeometry g = compute_geometry(problem, config.constants);
  const Classification c = classify(problem, build_initial_state(problem, config), g);
  const Json j{{"classification", to_json(c)}, {"geometry_digest", geometry_digest(g)}};
  const fs::path dir = config.output.directory;
  fs::create_directories(dir);
  write_file(dir / "classification.json", dump(j));
  out << dump(j);
  return 0;
}

int cmd_sweep(const RunConfig& base, int workers, std::ostream& out) {
  const std::vector<double> qs = base.sweep.q.empty() ? std::vector{base.problem.exponents.q} : base.sweep.q;
  const std::vector<double> ps = base.sweep.p.empty() ? std::vector{base.problem.exponents.p} : base.sweep.p;
  const std::vector<double> amps = base.sweep.amplitude.empty() ? std::vector{1.0} : base.sweep.amplitude;

  struct Run {
    double q, p, amplitude;
    int family;  ///< index into the (q, p) geometry table
  };
  std::vector<Run> runs;
  std::vector<std::pair<double, double>> families;
  for (double q : qs)
    for (double p : ps) {
      families.emplace_back(q, p);
      for (double a : amps) runs.push_back({q, p, a, static_cast<int>(families.size()) - 1});
    }

  auto variant = [&](double q, double p) {
    RunConfig c = base;
    c.problem.exponents.q = q;
    c.problem.exponents.p = p;
    c.sweep = {};
    return c;
  };

  // Geometry depends on (q, p) only. A failed family is reported on each of its lines.
  std::vector<std::optional<WellGeometry>> geometries(families.size());
  std::vector<std::string> geometry_errors(families.size());
  detail::parallel_for(static_cast<int>(families.size()), workers, [&](int i) {
    try {
      const RunConfig c = variant(families[i].first, families[i].second);
      c.validate();
      geometries[i] = compute_geometry(build_problem(c), c.constants);
    } catch (const std::exception& e) {
      geometry_errors[i] = e.what();
    }
  });

  const fs::path dir = base.output.directory;
  fs::create_directories(dir);
  std::vector<Json> lines(runs.size());
  detail::parallel_for(static_cast<int>(runs.size()), workers, [&](int i) {
    const Run& run = runs[i];
    Json line{{"index", i}, {"q", run.q}, {"p", run.p}, {"amplitude", run.amplitude}};
    try {
      if (!geometries[run.family]) throw std::runtime_error(geometry_errors[run.family]);
      RunConfig c = variant(run.q, run.p);
      c.initial.u0 = scale_shape(c.initial.u0, run.amplitude);
      char name[32];
      std::snprintf(name, sizeof name, "run_%04d", i);
      c.output.directory = (dir / name).string();
      c.validate();
      const Problem problem = build_problem(c);
      const SimulationResult r = run_simulation(c, problem, *geometries[run.family], fs::path(c.output.directory));
      line["set_membership"] = std::string(to_string(r.classification.set_membership));
      line["E0"] = r.classification.E0;
      line["predicted"] = std::string(to_string(r.classification.predicted));
      line["outcome_flag"] = std::string(to_string(r.trajectory.outcome));
      line["observed"] = std::string(to_string(r.observed));
      line["t_detect"] = r.trajectory.blowup ? Json(r.trajectory.blowup->t_detect) : Json(nullptr);
      line["prediction_matches"] = prediction_matches(r.classification.predicted, r.observed);
      line["audit_passed"] = r.audit.passed();
      line["run_dir"] = name;
    } catch (const std::exception& e) {
      line["error"] = e.what();
    }
    lines[i] = std::move(line);
  });

  // Single writer, grid order.
  std::string jsonl;
  for (const Json& l : lines) jsonl += l.dump() + "\n";
  write_file(dir / "results.jsonl", jsonl);

  std::map<std::pair<std::string, std::string>, int> table;
  int errors = 0;
  for (const Json& l : lines) {
    if (l.contains("error")) {
      ++errors;
      continue;
    }
    ++table[{l["predicted"].get<std::string>(), l["observed"].get<std::string>()}];
  }
  std::string text = "predicted                  observed    count\n";
  for (const auto& [key, count] : table) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-26s %-11s %d\n", key.first.c_str(), key.second.c_str(), count);
    text += buf;
  }
  if (errors > 0) text += "failed runs: " + std::to_string(errors) + "\n";
  write_file(dir / "phase_table.txt", text);
  out << text;
  return 0;
}

int cmd_fit(const fs::path& trajectory_csv, double p, double window_fraction,
            const std::optional<fs::path>& out_dir, std::ostream& out) {
  if (!(p >= 0.0)) throw ConfigError("problem.p", "damping exponent must satisfy p >= 0");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw ConfigError("analysis.window_fraction", "must lie in (0, 1]");
  const std::vector<EnergyRecord> records = read_trajectory_csv(trajectory_csv);
  const std::vector<DecayFit> fits = fit_decay(records, p, window_fraction);
  const auto best = best_fit(fits);
  const Json j{{"fits", fits_json(fits)},
               {"best_fit", best ? Json(std::string(to_string(fits[*best].model))) : Json(nullptr)}};
  if (out_dir) {
    fs::create_directories(*out_dir);
    write_file(*out_dir / "fits.json", dump(j));
  }
  out << dump(j);
  return 0;
}

}  // namespace logwave
