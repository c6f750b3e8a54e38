// logwave: potential-well constants, simulation, classification and sweeps
// for the damped wave equation with a logarithmic source.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "logwave/commands.hpp"
#include "logwave/error.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, bool config_required = true) {
  cmd->add_option("--config", c.config_path, "Run configuration (JSON or key = value)")
      ->required(config_required)
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out_dir, "Output directory (overrides output.directory)");
  cmd->add_option("--seed", c.seed, "Seed for optimizer restarts and direction sampling");
}

logwave::RunConfig resolve(const Common& c) {
  logwave::RunConfig config = logwave::load_config(c.config_path);
  if (!c.out_dir.empty()) config.output.directory = c.out_dir;
  if (c.seed) {
    config.output.seed = *c.seed;
    config.constants.optimizer.seed = *c.seed;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potential-well analysis and simulation of u_tt - mu(t)(A u_x)_x + g(u_t) = |u|^{q-2}u log|u|"};
  app.require_subcommand(1);

  Common constants_opts, simulate_opts, classify_opts, sweep_opts;
  int workers = 1;
  auto* constants = app.add_subcommand("constants", "Compute the well geometry (B7, K, r_*, M, d, eps')");
  add_common(constants, constants_opts);
  auto* simulate = app.add_subcommand("simulate", "Classify, integrate, fit and audit one run");
  add_common(simulate, simulate_opts);
  auto* classify = app.add_subcommand("classify", "Set membership and predicted regime, no integration");
  add_common(classify, classify_opts);
  auto* sweep = app.add_subcommand("sweep", "Run the sweep grid over q, p and amplitude");
  add_common(sweep, sweep_opts);
  sweep->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);

  std::string csv_path, fit_out, fit_config;
  double p = 0.0, window = 0.5;
  auto* fit = app.add_subcommand("fit", "Re-fit decay rates on an existing trajectory.csv");
  fit->add_option("trajectory", csv_path, "trajectory.csv written by simulate")->required()->check(CLI::ExistingFile);
  fit->add_option("--p", p, "Damping exponent");
  fit->add_option("--window", window, "Tail fraction of [1, t_end]");
  fit->add_option("--config", fit_config, "Take p and the window from this configuration")->check(CLI::ExistingFile);
  fit->add_option("--out", fit_out, "Also write fits.json here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*constants) return logwave::cmd_constants(resolve(constants_opts), std::cout);
    if (*simulate) return logwave::cmd_simulate(resolve(simulate_opts), std::cout);
    if (*classify) return logwave::cmd_classify(resolve(classify_opts), std::cout);
    if (*sweep) return logwave::cmd_sweep(resolve(sweep_opts), workers, std::cout);
    if (*fit) {
      if (!fit_config.empty()) {
        const logwave::RunConfig config = logwave::load_config(fit_config);
        p = config.problem.exponents.p;
        window = config.window_fraction;
      }
      std::optional<std::filesystem::path> out;
      if (!fit_out.empty()) out = fit_out;
      return logwave::cmd_fit(csv_path, p, window, out, std::cout);
    }
  } catch (const logwave::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
