#pragma once

#include <string>

#include <json.hpp>

#include "gaslab/scenario.hpp"

namespace gaslab {

/// Parses a scenario from JSON; throws config_error naming the offending
/// field path on any malformed entry.
ScenarioConfig config_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ScenarioConfig& config);

ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& config, const std::string& path);

/// FNV-1a hash (hex) of the canonical serialization: keys sorted, shortest
/// round-trip number formatting. Stable across platforms.
std::string config_hash(const ScenarioConfig& config);

}  // namespace gaslab
