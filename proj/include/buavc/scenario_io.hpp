#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "buavc/sim.hpp"

namespace buavc {

/// Raised for syntax errors (with a line number), unknown or ill-typed
/// fields, and overrides addressing nonexistent keys.
struct ScenarioParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parse a scenario document. Documents are JSON with a fixed schema;
/// unknown fields anywhere are rejected. Overrides are dotted key=value
/// pairs ("delta=0.3", "estimation.kf.q=0.1", "robots.0.v_max=0.5") applied
/// to the document before conversion, so they face the same schema checks.
/// Obstacles accept either a "box" {lo, hi} form (2D or 3D) or a CCW
/// "vertices" polygon form (2D only).
Scenario parse_scenario(const std::string& text,
                        const std::vector<std::string>& overrides = {});

Scenario load_scenario(const std::string& path,
                       const std::vector<std::string>& overrides = {});

/// Canonical serialization: fixed field order, two-space indent, numbers
/// at 12 significant digits. Parsing the output and serializing again
/// reproduces it byte for byte.
std::string serialize_scenario(const Scenario& s);

void save_scenario(const Scenario& s, const std::string& path);

/// FNV-1a over the canonical serialization.
uint64_t scenario_hash(const Scenario& s);

/// Trajectory table, one row per robot per step (row count = steps x
/// robots). Columns: step, id, true/est coordinates padded to three axes,
/// estimate covariance diagonal, command fields padded to four, cell_empty,
/// mode (normal | resolve), status (active | at_goal | collided).
std::string trajectory_csv(const World& w);

/// Metrics fields plus scenario hash, seed, and wall time, in the same
/// document style as scenarios.
std::string metrics_summary(const Metrics& m, const Scenario& s,
                            double wall_seconds);

}  // namespace buavc
