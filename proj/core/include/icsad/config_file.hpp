#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "icsad/process_sim.hpp"

namespace icsad {

// Plain-text `key = value` settings, one per line; `#` starts a comment.
using Settings = std::map<std::string, std::string, std::less<>>;

Settings read_settings(const std::filesystem::path& path);  // throws IoFailure, ConfigError

// Sets one PlantConfig field by name. Throws ConfigError on unknown keys or
// unparsable values.
void apply_setting(PlantConfig& config, std::string_view key, std::string_view value);
PlantConfig plant_config_from(const Settings& settings, PlantConfig base = {});

void to_json(nlohmann::json& j, const PlantConfig& c);
void from_json(const nlohmann::json& j, PlantConfig& c);

}  // namespace icsad
