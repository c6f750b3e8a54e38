#include "logwave/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "logwave/error.hpp"

namespace logwave {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// Strict view of one JSON object: every key must be consumed.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return required_number(key);
  }

  double required_number(const std::string& key) {
    if (!has(key)) throw ConfigError(join(path_, key), "required key is missing");
    const Json& v = raw(key);
    if (!v.is_number()) throw ConfigError(join(path_, key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(join(path_, key), "must be finite");
    return x;
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(join(path_, key), "expected an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_number_unsigned()) throw ConfigError(join(path_, key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_string()) throw ConfigError(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    const Json& v = raw(key);
    if (!v.is_array()) throw ConfigError(join(path_, key), "expected an array of numbers");
    std::vector<double> out;
    for (const Json& x : v) {
      if (!x.is_number() || !std::isfinite(x.get<double>()))
        throw ConfigError(join(path_, key), "expected an array of finite numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  Section child(const std::string& key) { return Section(raw(key), join(path_, key)); }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(join(path_, item.key()), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

InitialShape read_shape(Section s) {
  InitialShape shape;
  const std::string kind = s.string("kind", "zero");
  if (kind == "zero") {
    shape.kind = InitialShape::Kind::zero;
  } else if (kind == "mode") {
    shape.kind = InitialShape::Kind::mode;
    shape.mode = s.integer("mode", 1);
    shape.amplitude = s.number("amplitude", 0.0);
  } else if (kind == "gaussian") {
    shape.kind = InitialShape::Kind::gaussian;
    shape.amplitude = s.number("amplitude", 0.0);
    shape.center = s.number("center", 0.5);
    shape.width = s.number("width", 0.1);
  } else if (kind == "modal") {
    shape.kind = InitialShape::Kind::modal;
    shape.coeffs = s.numbers("coeffs");
  } else {
    throw ConfigError(join(s.path(), "kind"), "expected zero, mode, gaussian or modal");
  }
  s.finish();
  return shape;
}

Json write_shape(const InitialShape& shape) {
  switch (shape.kind) {
    case InitialShape::Kind::zero:
      return Json{{"kind", "zero"}};
    case InitialShape::Kind::mode:
      return Json{{"kind", "mode"}, {"mode", shape.mode}, {"amplitude", shape.amplitude}};
    case InitialShape::Kind::gaussian:
      return Json{{"kind", "gaussian"},
                  {"amplitude", shape.amplitude},
                  {"center", shape.center},
                  {"width", shape.width}};
    case InitialShape::Kind::modal:
      return Json{{"kind", "modal"}, {"coeffs", shape.coeffs}};
  }
  return Json{{"kind", "zero"}};
}

void read_problem(Section s, ProblemSpec& p) {
  p.grid.length = s.number("length", p.grid.length);
  p.grid.n_modes = s.integer("n_modes", p.grid.n_modes);
  p.grid.n_cells = s.integer("n_cells", p.grid.n_cells);
  p.grid.nodes_per_cell = s.integer("nodes_per_cell", p.grid.nodes_per_cell);
  p.exponents.q = s.required_number("q");
  p.exponents.p = s.number("p", p.exponents.p);
  p.exponents.c1 = s.number("c1", p.exponents.c1);
  p.exponents.c2 = s.number("c2", p.exponents.c2);
  p.damping = s.string("damping", p.damping);

  if (s.has("A")) {
    Section a = s.child("A");
    const std::string family = a.string("family", "constant");
    if (family == "constant") {
      p.A = Diffusivity::constant(a.number("value", 1.0));
    } else if (family == "linear") {
      p.A = Diffusivity::linear(a.number("value", 1.0), a.number("slope", 0.0));
    } else {
      throw ConfigError("problem.A.family", "expected constant or linear");
    }
    a.finish();
  }
  if (s.has("mu")) {
    Section m = s.child("mu");
    const std::string family = m.string("family", "constant");
    if (family == "constant") {
      p.mu = TimeCoefficient::constant(m.number("value", 1.0));
    } else if (family == "exp_decay") {
      p.mu = TimeCoefficient::exp_decay(m.number("initial", 2.0), m.number("asymptote", 1.0),
                                        m.number("rate", 1.0));
    } else {
      throw ConfigError("problem.mu.family", "expected constant or exp_decay");
    }
    m.finish();
  }
  s.finish();
}

}  // namespace

void RunConfig::validate() const {
  problem.exponents.validate();
  if (problem.damping != "power") throw ConfigError("problem.damping", "only the power family is available");
  integrator.validate();
  const auto& gs = constants.gamma;
  if (!(gs.gamma_min > 0.0)) throw ConfigError("constants.gamma_min", "must be > 0");
  if (!(gs.gamma_max > gs.gamma_min)) throw ConfigError("constants.gamma_max", "must exceed gamma_min");
  if (gs.points < 1) throw ConfigError("constants.gamma_points", "must be >= 1");
  if (gs.max_doublings < 0) throw ConfigError("constants.max_doublings", "must be >= 0");
  const auto& os = constants.optimizer;
  if (os.restarts < 0) throw ConfigError("constants.restarts", "must be >= 0");
  if (!(os.tolerance > 0.0)) throw ConfigError("constants.tolerance", "must be > 0");
  if (os.max_iterations < 1) throw ConfigError("constants.max_iterations", "must be >= 1");
  if (os.threads < 1) throw ConfigError("constants.threads", "must be >= 1");
  if (constants.d_samples < 1) throw ConfigError("constants.d_samples", "must be >= 1");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw ConfigError("analysis.window_fraction", "must lie in (0, 1]");
  for (double q : sweep.q)
    if (!(q > 2.0)) throw ConfigError("sweep.q", "every entry must satisfy q > 2");
  for (double p : sweep.p)
    if (!(p >= 0.0)) throw ConfigError("sweep.p", "every entry must satisfy p >= 0");
  if (output.directory.empty()) throw ConfigError("output.directory", "must not be empty");

  // Grid, coefficient and initial-shape checks live in their constructors.
  const Problem prob = build_problem(*this);
  (void)build_initial_state(prob, *this);
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  Section root(j, "");
  if (!root.has("problem")) throw ConfigError("problem.q", "required key is missing");
  read_problem(root.child("problem"), c.problem);

  if (root.has("initial")) {
    Section s = root.child("initial");
    if (s.has("u0")) c.initial.u0 = read_shape(s.child("u0"));
    if (s.has("u1")) c.initial.u1 = read_shape(s.child("u1"));
    s.finish();
  }
  if (root.has("integrator")) {
    Section s = root.child("integrator");
    IntegratorConfig& ic = c.integrator;
    ic.rel_tol = s.number("rel_tol", ic.rel_tol);
    ic.abs_tol = s.number("abs_tol", ic.abs_tol);
    ic.dt_init = s.number("dt_init", ic.dt_init);
    ic.dt_min = s.number("dt_min", ic.dt_min);
    ic.dt_max = s.number("dt_max", ic.dt_max);
    ic.t_end = s.number("t_end", ic.t_end);
    ic.blowup_l2_threshold = s.number("blowup_l2_threshold", ic.blowup_l2_threshold);
    s.finish();
  }
  if (root.has("constants")) {
    Section s = root.child("constants");
    GammaGridSettings& gs = c.constants.gamma;
    OptimizerSettings& os = c.constants.optimizer;
    gs.gamma_min = s.number("gamma_min", gs.gamma_min);
    gs.gamma_max = s.number("gamma_max", gs.gamma_max);
    gs.points = s.integer("gamma_points", gs.points);
    gs.max_doublings = s.integer("max_doublings", gs.max_doublings);
    os.restarts = s.integer("restarts", os.restarts);
    os.tolerance = s.number("tolerance", os.tolerance);
    os.max_iterations = s.integer("max_iterations", os.max_iterations);
    os.threads = s.integer("threads", os.threads);
    c.constants.d_samples = s.integer("d_samples", c.constants.d_samples);
    s.finish();
  }
  if (root.has("analysis")) {
    Section s = root.child("analysis");
    c.window_fraction = s.number("window_fraction", c.window_fraction);
    s.finish();
  }
  if (root.has("output")) {
    Section s = root.child("output");
    c.output.directory = s.string("directory", c.output.directory);
    c.integrator.record_every = s.number("cadence", c.integrator.record_every);
    c.output.seed = s.unsigned_integer("seed", c.output.seed);
    s.finish();
  }
  if (root.has("sweep")) {
    Section s = root.child("sweep");
    c.sweep.q = s.numbers("q");
    c.sweep.p = s.numbers("p");
    c.sweep.amplitude = s.numbers("amplitude");
    s.finish();
  }
  root.finish();
  c.constants.optimizer.seed = c.output.seed;
  c.validate();
  return c;
}

Json config_to_json(const RunConfig& c) {
  const ProblemSpec& p = c.problem;
  Json A = p.A.family == Diffusivity::Family::constant
               ? Json{{"family", "constant"}, {"value", p.A.value}}
               : Json{{"family", "linear"}, {"value", p.A.value}, {"slope", p.A.slope}};
  Json mu = p.mu.family == TimeCoefficient::Family::constant
                ? Json{{"family", "constant"}, {"value", p.mu.initial}}
                : Json{{"family", "exp_decay"},
                       {"initial", p.mu.initial},
                       {"asymptote", p.mu.asymptote},
                       {"rate", p.mu.rate}};
  Json out{
      {"problem",
       {{"length", p.grid.length},
        {"n_modes", p.grid.n_modes},
        {"n_cells", p.grid.n_cells},
        {"nodes_per_cell", p.grid.nodes_per_cell},
        {"q", p.exponents.q},
        {"p", p.exponents.p},
        {"c1", p.exponents.c1},
        {"c2", p.exponents.c2},
        {"damping", p.damping},
        {"A", A},
        {"mu", mu}}},
      {"initial", {{"u0", write_shape(c.initial.u0)}, {"u1", write_shape(c.initial.u1)}}},
      {"integrator",
       {{"rel_tol", c.integrator.rel_tol},
        {"abs_tol", c.integrator.abs_tol},
        {"dt_init", c.integrator.dt_init},
        {"dt_min", c.integrator.dt_min},
        {"dt_max", c.integrator.dt_max},
        {"t_end", c.integrator.t_end},
        {"blowup_l2_threshold", c.integrator.blowup_l2_threshold}}},
      {"constants",
       {{"gamma_min", c.constants.gamma.gamma_min},
        {"gamma_max", c.constants.gamma.gamma_max},
        {"gamma_points", c.constants.gamma.points},
        {"max_doublings", c.constants.gamma.max_doublings},
        {"restarts", c.constants.optimizer.restarts},
        {"tolerance", c.constants.optimizer.tolerance},
        {"max_iterations", c.constants.optimizer.max_iterations},
        {"threads", c.constants.optimizer.threads},
        {"d_samples", c.constants.d_samples}}},
      {"analysis", {{"window_fraction", c.window_fraction}}},
      {"output",
       {{"directory", c.output.directory}, {"cadence", c.integrator.record_every}, {"seed", c.output.seed}}},
  };
  if (!c.sweep.empty())
    out["sweep"] = Json{{"q", c.sweep.q}, {"p", c.sweep.p}, {"amplitude", c.sweep.amplitude}};
  return out;
}

Json parse_key_value(const std::string& text) {
  Json root = Json::object();
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = join(section, trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key.back() == '.') throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");

    Json parsed = Json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;

    Json* node = &root;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (dot == std::string::npos) {
        if (node->contains(part)) throw ConfigError(key, "duplicate key");
        (*node)[part] = std::move(parsed);
        break;
      }
      Json& next = (*node)[part];
      if (next.is_null()) next = Json::object();
      if (!next.is_object()) throw ConfigError(key, "conflicts with a scalar set earlier");
      node = &next;
      start = dot + 1;
    }
  }
  return root;
}

RunConfig parse_config(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("", "malformed JSON");
    return config_from_json(j);
  }
  return config_from_json(parse_key_value(text));
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Problem build_problem(const RunConfig& config) {
  const ProblemSpec& p = config.problem;
  const double horizon = std::max(100.0, config.integrator.t_end);
  return Problem(DomainGrid(p.grid), p.A, p.mu, p.exponents, horizon);
}

ModalState build_initial_state(const Problem& problem, const RunConfig& config) {
  auto coeffs = [&](const InitialShape& shape, const char* which) {
    try {
      return shape.to_coeffs(problem.grid());
    } catch (const ConfigError& e) {
      // shape errors name "initial.<key>"; insert which profile failed
      std::string field = e.field();
      field.insert(std::string("initial").size(), std::string(".") + which);
      const std::string msg = std::string(e.what()).substr(e.field().size() + 2);
      throw ConfigError(field, msg);
    }
  };
  return {0.0, coeffs(config.initial.u0, "u0"), coeffs(config.initial.u1, "u1")};
}

InitialShape scale_shape(InitialShape shape, double factor) {
  shape.amplitude *= factor;
  for (double& c : shape.coeffs) c *= factor;
  return shape;
}

}  // namespace logwave
