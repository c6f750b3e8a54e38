#pragma once

// JSON and text forms of the analysis results.

#include <string>

#include <nlohmann/json.hpp>

#include "logwave/dynamics.hpp"
#include "logwave/lab.hpp"
#include "logwave/varconst.hpp"

namespace logwave {

using Json = nlohmann::ordered_json;

Json to_json(const WellGeometry& geometry);
Json to_json(const EpsilonPrime& eps);
Json to_json(const Classification& classification);
Json to_json(const DecayFit& fit);
Json to_json(const AuditCheck& check);
Json to_json(const AuditReport& report);
Json to_json(const BlowupReport& report);

/// The headline constants only (what summary.json carries).
Json geometry_digest(const WellGeometry& geometry);

/// Aligned "key  value" lines for terminal output.
std::string geometry_text(const WellGeometry& geometry);

}  // namespace logwave
