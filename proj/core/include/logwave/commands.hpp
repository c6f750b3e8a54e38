#pragma once

// The subcommands behind the logwave tool. Each returns a process exit code:
// scientific outcomes (blow-up, no prediction) are 0; configuration errors
// propagate as ConfigError for the caller to report.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "logwave/config.hpp"
#include "logwave/lab.hpp"

namespace logwave {

struct SimulationResult {
  Classification classification;
  Trajectory trajectory;
  ObservedRegime observed = ObservedRegime::global;
  std::vector<DecayFit> fits;
  AuditReport audit;
  Json summary;
};

/// Classify, integrate, fit and audit one configuration. When `out_dir` is
/// set, trajectory.csv (streamed), summary.json and audit.json are written there.
SimulationResult run_simulation(const RunConfig& config, const Problem& problem,
                                const WellGeometry& geometry,
                                const std::optional<std::filesystem::path>& out_dir);

/// Human-readable digest of a run.
std::string summary_table(const SimulationResult& result);

std::vector<EnergyRecord> read_trajectory_csv(const std::filesystem::path& path);

int cmd_constants(const RunConfig& config, std::ostream& out);
int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_classify(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, int workers, std::ostream& out);
int cmd_fit(const std::filesystem::path& trajectory_csv, double p, double window_fraction,
            const std::optional<std::filesystem::path>& out_dir, std::ostream& out);

}  // namespace logwave
