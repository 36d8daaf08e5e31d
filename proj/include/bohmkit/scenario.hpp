#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bohmkit/units.hpp"

namespace bohmkit {

inline constexpr int kScenarioSchemaVersion = 1;

/// Physical kind of a numeric config entry, for unit conversion.
enum class Quantity { none, length, time, energy, wavevector, frequency, stiffness };

/// A validated scenario configuration: the user document merged onto the
/// scenario defaults, values still in the config's unit system.
struct ScenarioConfig {
  std::string scenario;
  UnitSystem units = UnitSystem::internal;
  nlohmann::json params;  // sections: grid, potential, initial_state, integrator, ensemble, outputs, ...

  /// Entry at a JSON pointer such as "/grid/lo", converted to internal units.
  double internal(const std::string& pointer) const;
  const nlohmann::json& at(const std::string& pointer) const;
  std::uint64_t seed() const;
  /// Canonical document (schema version, scenario, units, params).
  nlohmann::json document() const;
  /// FNV-1a 64 of the canonical document, as 16 hex digits.
  std::string hash() const;
};

std::vector<std::string> scenario_ids();
/// Default document of a scenario (a valid config on its own).
nlohmann::json scenario_defaults(const std::string& id);

/// Schema check and merge. Throws ConfigError listing every problem; an
/// unknown scenario id lists the valid ones.
ScenarioConfig parse_scenario_config(const nlohmann::json& doc);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Command-line overrides applied after parsing (and re-validated).
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> checkpoint_every;  // in the config's time unit
};
ScenarioConfig apply_overrides(const ScenarioConfig& cfg, const RunOverrides& o);

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;  // "<", ">", "<=", "==", "monotonic", ...
};

struct ScenarioReport {
  std::string scenario;
  std::string config_hash;
  std::uint64_t seed = 0;
  UnitSystem units = UnitSystem::internal;
  std::vector<CheckResult> checks;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<std::string> warnings;
  std::vector<std::string> files;  // relative to the output directory

  bool passed() const;
  nlohmann::json to_json() const;
};

/// Runs a scenario end to end, writing report.json, CSV/NDJSON series, SVG
/// plots and optional raw field dumps into `out` (created if missing).
/// Module errors are rethrown as ConfigError carrying the scenario name when
/// they come from a precondition, as Error otherwise.
ScenarioReport run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out);

}  // namespace bohmkit
