#include "icsad/config_file.hpp"

#include <charconv>
#include <fstream>

#include <nlohmann/json.hpp>

#include "icsad/errors.hpp"

namespace icsad {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("cannot parse value '" + std::string(text) + "' for '" + std::string(key) +
                      "'");
  return value;
}

}  // namespace

Settings read_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open configuration file " + path.string());
  Settings settings;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    settings[std::string(trim(view.substr(0, eq)))] = std::string(trim(view.substr(eq + 1)));
  }
  return settings;
}

void apply_setting(PlantConfig& c, std::string_view key, std::string_view value) {
  auto num = [&](double& field) { field = parse_number<double>(key, value); };
  if (key == "container_capacity_l") num(c.container_capacity_l);
  else if (key == "level_low_l") num(c.level_low_l);
  else if (key == "level_high_l") num(c.level_high_l);
  else if (key == "pump_rate_lps") num(c.pump_rate_lps);
  else if (key == "valve_rate_lps") num(c.valve_rate_lps);
  else if (key == "total_water_l") num(c.total_water_l);
  else if (key == "sample_rate_hz") num(c.sample_rate_hz);
  else if (key == "noise_sigma") num(c.noise_sigma);
  else if (key == "ambient_temp_c") num(c.ambient_temp_c);
  else if (key == "hysteresis_frac") num(c.hysteresis_frac);
  else if (key == "rng_seed") c.rng_seed = parse_number<std::uint64_t>(key, value);
  else throw ConfigError("unknown plant setting '" + std::string(key) + "'");
}

PlantConfig plant_config_from(const Settings& settings, PlantConfig base) {
  for (const auto& [key, value] : settings) apply_setting(base, key, value);
  return base;
}

void to_json(nlohmann::json& j, const PlantConfig& c) {
  j = nlohmann::json{{"container_capacity_l", c.container_capacity_l},
                     {"level_low_l", c.level_low_l},
                     {"level_high_l", c.level_high_l},
                     {"pump_rate_lps", c.pump_rate_lps},
                     {"valve_rate_lps", c.valve_rate_lps},
                     {"total_water_l", c.total_water_l},
                     {"sample_rate_hz", c.sample_rate_hz},
                     {"noise_sigma", c.noise_sigma},
                     {"ambient_temp_c", c.ambient_temp_c},
                     {"hysteresis_frac", c.hysteresis_frac},
                     {"rng_seed", c.rng_seed}};
}

void from_json(const nlohmann::json& j, PlantConfig& c) {
  j.at("container_capacity_l").get_to(c.container_capacity_l);
  j.at("level_low_l").get_to(c.level_low_l);
  j.at("level_high_l").get_to(c.level_high_l);
  j.at("pump_rate_lps").get_to(c.pump_rate_lps);
  j.at("valve_rate_lps").get_to(c.valve_rate_lps);
  j.at("total_water_l").get_to(c.total_water_l);
  j.at("sample_rate_hz").get_to(c.sample_rate_hz);
  j.at("noise_sigma").get_to(c.noise_sigma);
  j.at("ambient_temp_c").get_to(c.ambient_temp_c);
  j.at("hysteresis_frac").get_to(c.hysteresis_frac);
  j.at("rng_seed").get_to(c.rng_seed);
}

}  // namespace icsad
