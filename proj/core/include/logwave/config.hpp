#pragma once

// Run configuration: loading from JSON or dotted key = value text, strict
// validation with field-path diagnostics, and a canonical JSON echo.

#include <cstdint>
#include <string>
#include <vector>

#include "logwave/dynamics.hpp"
#include "logwave/serialize.hpp"
#include "logwave/varconst.hpp"

namespace logwave {

struct ProblemSpec {
  GridOptions grid;
  Exponents exponents;
  Diffusivity A;
  TimeCoefficient mu;
  std::string damping = "power";
};

struct InitialSpec {
  InitialShape u0;
  InitialShape u1;
};

struct OutputSpec {
  std::string directory = "out";
  std::uint64_t seed = 1;
};

/// Parameter grid of `sweep`; an empty axis keeps the base value.
struct SweepSpec {
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> amplitude;  ///< multiplies the u0 amplitude (or its coefficients)

  bool empty() const noexcept { return q.empty() && p.empty() && amplitude.empty(); }
};

struct RunConfig {
  ProblemSpec problem;
  InitialSpec initial;
  IntegratorConfig integrator;
  GeometrySettings constants;
  OutputSpec output;
  double window_fraction = 0.5;
  SweepSpec sweep;

  /// Re-checks every module invariant; throws ConfigError with a field path.
  void validate() const;
};

/// Strict reader: unknown keys and wrong types are ConfigErrors. `problem.q`
/// is required; everything else has a default.
RunConfig config_from_json(const Json& j);

/// Canonical echo; config_from_json(config_to_json(c)) reproduces c.
Json config_to_json(const RunConfig& config);

/// Nested JSON from "a.b.c = value" lines. Values are parsed as JSON when
/// possible (numbers, booleans, arrays, quoted strings) and kept as bare
/// strings otherwise. Blank lines and lines starting with '#' are skipped;
/// a "[section]" line prefixes the keys that follow.
Json parse_key_value(const std::string& text);

/// Either format, chosen by the first non-blank character ('{' means JSON).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

Problem build_problem(const RunConfig& config);
ModalState build_initial_state(const Problem& problem, const RunConfig& config);

/// Multiplies the amplitude of a named shape, or every modal coefficient.
InitialShape scale_shape(InitialShape shape, double factor);

}  // namespace logwave
