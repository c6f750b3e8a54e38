#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "logwave/commands.hpp"
#include "logwave/config.hpp"

using namespace logwave;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
problem.length = 3.141592653589793
problem.n_modes = 8
problem.q = 3
problem.p = 0
problem.mu.family = exp_decay
problem.mu.initial = 2
problem.mu.asymptote = 1
problem.mu.rate = 1
initial.u0.kind = mode
initial.u0.mode = 1
initial.u0.amplitude = 0.1
integrator.t_end = 3
output.cadence = 0.5
constants.gamma_points = 10
constants.restarts = 2
constants.d_samples = 8
)";

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("logwave_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Run {
  int code = -1;
  std::string output;
};

// Runs the logwave binary named by LOGWAVE_CLI with `args`.
Run run_cli(const std::string& args, const fs::path& scratch) {
  const char* exe = std::getenv("LOGWAVE_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "LOGWAVE_CLI is not set");
  const fs::path log = scratch / "cli_output.txt";
  const std::string cmd = std::string("\"") + exe + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = slurp(log);
  return r;
}

// `base` with the line for `key` replaced (or removed when value is empty).
std::string small_with(const std::string& key, const std::string& value, const std::string& base = kSmall) {
  std::istringstream in(base);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind(key + " =", 0) == 0) {
      if (!value.empty()) out += key + " = " + value + "\n";
      continue;
    }
    out += line + "\n";
  }
  return out;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::string zero_data() {
  std::string text;
  std::istringstream in(kSmall);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("initial.u0.", 0) != 0) text += line + "\n";
  return text + "initial.u0.kind = zero\n";
}

}  // namespace

TEST_CASE("missing q is reported as problem.q") {
  CHECK(field_of("problem.n_modes = 8\n") == "problem.q");
  CHECK(field_of("integrator.t_end = 3\n") == "problem.q");
  CHECK(field_of("{\"problem\": {\"p\": 1}}") == "problem.q");
}

TEST_CASE("unknown keys and bad values are rejected with their path") {
  CHECK(field_of(std::string(kSmall) + "problem.qq = 3\n") == "problem.qq");
  CHECK(field_of(std::string(kSmall) + "integrator.tolerance = 1e-8\n") == "integrator.tolerance");
  CHECK(field_of(std::string(kSmall) + "bogus.key = 1\n") == "bogus");
  CHECK(field_of(std::string(kSmall) + "problem.q = 1.5\n") == "problem.q");
  CHECK(field_of(std::string(kSmall) + "problem.A.family = quadratic\n") == "problem.A.family");
  CHECK(field_of(small_with("problem.mu.initial", "0.5")).rfind("problem.mu", 0) == 0);
  CHECK(field_of(std::string(kSmall) + "problem.q = 4\n") == "problem.q");  // duplicate
  CHECK(field_of(small_with("initial.u0.kind", "zero")) == "initial.u0.mode");  // key of another shape
  CHECK(field_of(std::string(kSmall) + "initial.u0.mode = 40\n") == "initial.u0.mode");
  CHECK(field_of(std::string(kSmall) + "analysis.window_fraction = 0\n") == "analysis.window_fraction");
  CHECK(field_of(std::string(kSmall) + "sweep.q = [3, 2]\n") == "sweep.q");
  CHECK(field_of(std::string(kSmall) + "integrator.dt_init = 1e-20\n") == "integrator.dt_init");
  CHECK(field_of("problem.q = \"three\"\n").rfind("problem.q", 0) == 0);
  CHECK_THROWS_AS(parse_config("this line has no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
}

TEST_CASE("key = value syntax") {
  const Json j = parse_key_value(
      "# comment\n"
      "\n"
      "a.b = 3\n"
      "a.c = [1, 2.5]\n"
      "[x.y]\n"
      "name = hello world\n"
      "quoted = \"text\"\n"
      "flag = true\n");
  CHECK(j["a"]["b"] == 3);
  CHECK(j["a"]["c"][1] == 2.5);
  CHECK(j["x"]["y"]["name"] == "hello world");
  CHECK(j["x"]["y"]["quoted"] == "text");
  CHECK(j["x"]["y"]["flag"] == true);
}

TEST_CASE("config round-trip through the canonical echo") {
  const RunConfig a = parse_config(std::string(kSmall) + "sweep.q = [3, 4]\ninitial.u1.kind = gaussian\n"
                                                         "initial.u1.amplitude = 0.2\n");
  const Json echo = config_to_json(a);
  const RunConfig b = config_from_json(echo);
  CHECK(config_to_json(b).dump() == echo.dump());
  const RunConfig c = parse_config(echo.dump());
  CHECK(config_to_json(c).dump() == echo.dump());

  CHECK(a.problem.exponents.q == 3.0);
  CHECK(a.problem.grid.n_modes == 8);
  CHECK(a.integrator.record_every == 0.5);
  CHECK(a.constants.gamma.points == 10);
  CHECK(a.sweep.q == std::vector<double>{3.0, 4.0});
  CHECK(a.initial.u1.kind == InitialShape::Kind::gaussian);
  CHECK(a.constants.optimizer.seed == a.output.seed);
}

TEST_CASE("problem and initial state from a config") {
  const RunConfig cfg = parse_config(kSmall);
  const Problem problem = build_problem(cfg);
  CHECK(problem.n_modes() == 8);
  CHECK(problem.coeff().mu0() == doctest::Approx(1.0));
  CHECK(problem.coeff().mu(0.0) == doctest::Approx(2.0));
  const ModalState s = build_initial_state(problem, cfg);
  CHECK(s.u[0] == 0.1);
  CHECK(s.v.isZero());

  InitialShape modal;
  modal.kind = InitialShape::Kind::modal;
  modal.coeffs = {1.0, -2.0};
  CHECK(scale_shape(modal, 3.0).coeffs == std::vector<double>{3.0, -6.0});
  CHECK(scale_shape(InitialShape::single_mode(2, 0.5), 4.0).amplitude == 2.0);
}

TEST_CASE("constants subcommand: B7 = 1 and byte-identical reruns") {
  TempDir tmp;
  const fs::path conf = write_config(tmp.path, "small.conf", kSmall);
  const Run first = run_cli("constants --config " + conf.string() + " --out " + (tmp.path / "a").string(), tmp.path);
  REQUIRE(first.code == 0);
  const Run second = run_cli("constants --config " + conf.string() + " --out " + (tmp.path / "b").string(), tmp.path);
  REQUIRE(second.code == 0);
  const std::string ja = slurp(tmp.path / "a" / "constants.json");
  const std::string jb = slurp(tmp.path / "b" / "constants.json");
  REQUIRE_FALSE(ja.empty());
  CHECK(ja == jb);
  const Json j = Json::parse(ja);
  CHECK(j["B7"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(j["r_star"].get<double>() <= j["rho_star"].get<double>());
  CHECK(first.output.find("B7") != std::string::npos);
}

TEST_CASE("config errors exit with code 2 and name the field") {
  TempDir tmp;
  const fs::path conf = write_config(tmp.path, "bad.conf", "problem.n_modes = 8\n");
  const Run r = run_cli("constants --config " + conf.string(), tmp.path);
  CHECK(r.code == 2);
  CHECK(r.output.find("problem.q") != std::string::npos);
  const Run missing = run_cli("simulate --config " + (tmp.path / "nope.conf").string(), tmp.path);
  CHECK(missing.code != 0);
}

TEST_CASE("simulate: zero initial data") {
  TempDir tmp;
  const fs::path conf = write_config(tmp.path, "zero.conf",
                                     zero_data());
  const fs::path out = tmp.path / "run";
  const Run r = run_cli("simulate --config " + conf.string() + " --out " + out.string(), tmp.path);
  REQUIRE(r.code == 0);
  const std::vector<EnergyRecord> rec = read_trajectory_csv(out / "trajectory.csv");
  REQUIRE(rec.size() == 7);
  for (const EnergyRecord& e : rec) {
    CHECK(e.E == 0.0);
    CHECK(e.l2_u == 0.0);
  }
  const Json summary = Json::parse(slurp(out / "summary.json"));
  for (const char* key : {"config_echo", "classification", "outcome_flag", "t_detect", "fits", "geometry_digest"})
    CHECK(summary.contains(key));
  CHECK(summary["outcome_flag"] == "completed");
  CHECK(summary["t_detect"].is_null());
  CHECK(fs::exists(out / "audit.json"));
}

TEST_CASE("simulate: W start is predicted and observed global") {
  TempDir tmp;
  const fs::path conf = write_config(tmp.path, "w.conf", kSmall);
  const fs::path out = tmp.path / "run";
  const Run r = run_cli("simulate --config " + conf.string() + " --out " + out.string(), tmp.path);
  REQUIRE(r.code == 0);
  const Json summary = Json::parse(slurp(out / "summary.json"));
  CHECK(summary["classification"]["set_membership"] == "W");
  CHECK(summary["predicted"] == "global_decay_exponential");
  CHECK(summary["observed"] == "global");
  CHECK(summary["prediction_matches"] == true);
  CHECK(summary["config_echo"]["problem"] == config_to_json(parse_config(kSmall))["problem"]);

  // fit re-reads the trajectory
  const Run fit = run_cli("fit " + (out / "trajectory.csv").string() + " --p 0 --out " + out.string(), tmp.path);
  CHECK(fit.code == 0);
  const Json fits = Json::parse(slurp(out / "fits.json"));
  CHECK(fits.dump().find("exponential") != std::string::npos);
}

TEST_CASE("simulate: negative energy blows up") {
  TempDir tmp;
  const fs::path conf = write_config(tmp.path, "blow.conf",
                                     small_with("integrator.t_end", "50", small_with("initial.u0.amplitude", "10")));
  const fs::path out = tmp.path / "run";
  const Run r = run_cli("simulate --config " + conf.string() + " --out " + out.string(), tmp.path);
  REQUIRE(r.code == 0);
  const Json summary = Json::parse(slurp(out / "summary.json"));
  CHECK(summary["predicted"] == "blowup_thm51");
  CHECK(summary["outcome_flag"] == "blowup_detected");
  CHECK(summary["t_detect"].get<double>() < 50.0);
}

TEST_CASE("classify writes the classification only") {
  TempDir tmp;
  const fs::path conf = write_config(tmp.path, "c.conf", kSmall);
  const fs::path out = tmp.path / "cls";
  const Run r = run_cli("classify --config " + conf.string() + " --out " + out.string(), tmp.path);
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "classification.json"));
  CHECK_FALSE(fs::exists(out / "trajectory.csv"));
  CHECK(r.output.find("W") != std::string::npos);
}

TEST_CASE("sweep: one line per grid point") {
  TempDir tmp;
  const fs::path conf = write_config(tmp.path, "s.conf",
                                     std::string(kSmall) + "sweep.q = [3, 4]\nsweep.amplitude = [1, 100]\n");
  const fs::path out = tmp.path / "sweep";
  const Run r = run_cli("sweep --workers 2 --config " + conf.string() + " --out " + out.string(), tmp.path);
  REQUIRE(r.code == 0);
  std::ifstream in(out / "results.jsonl");
  std::string line;
  std::vector<Json> lines;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(Json::parse(line));
  REQUIRE(lines.size() == 4);
  CHECK(fs::exists(out / "phase_table.txt"));
  // the seed fixes the results regardless of the worker count
  const fs::path out1 = tmp.path / "sweep1";
  REQUIRE(run_cli("sweep --workers 1 --config " + conf.string() + " --out " + out1.string(), tmp.path).code == 0);
  CHECK(slurp(out1 / "results.jsonl") == slurp(out / "results.jsonl"));
}
