#include "icsad/process_sim.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "icsad/errors.hpp"

namespace icsad {

namespace {

constexpr double kLevelTolerance = 1e-9;

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("invalid plant configuration: ") + what);
}

// Commanded actuator states for a phase, as executed by the PLC program.
void apply_controller(ProcessState& s) {
  s.pump_on = s.phase == Phase::Filling;
  s.valve_open = s.phase == Phase::Draining;
}

}  // namespace

void PlantConfig::validate() const {
  require(std::isfinite(container_capacity_l) && std::isfinite(total_water_l),
          "non-finite volume");
  require(level_low_l > 0.0, "level_low_l must be positive");
  require(level_low_l < level_high_l, "level_low_l must be below level_high_l");
  require(level_high_l <= container_capacity_l, "level_high_l exceeds capacity");
  require(valve_rate_lps > 0.0, "valve_rate_lps must be positive");
  require(pump_rate_lps > valve_rate_lps, "pump_rate_lps must exceed valve_rate_lps");
  require(total_water_l >= level_high_l, "total_water_l cannot reach level_high_l");
  require(total_water_l - level_low_l <= container_capacity_l,
          "container 1 would overflow at level_low_l");
  require(sample_rate_hz > 0.0 && std::isfinite(sample_rate_hz), "sample_rate_hz must be positive");
  require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "noise_sigma must be non-negative");
  require(hysteresis_frac >= 0.0, "hysteresis_frac must be non-negative");
}

double PlantConfig::cycle_period_s() const {
  const double band = level_high_l - level_low_l;
  return band / pump_rate_lps + band / valve_rate_lps;
}

ProcessState ProcessState::initial(const PlantConfig& config) {
  ProcessState s;
  s.level2_l = config.level_low_l;
  s.level1_l = config.total_water_l - s.level2_l;
  s.phase = Phase::Filling;
  apply_controller(s);
  s.flow_lps = config.pump_rate_lps;
  s.temp_c = config.ambient_temp_c;
  return s;
}

ProcessState step(const ProcessState& state, const PlantConfig& config, double dt) {
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");

  ProcessState s = state;
  const bool forced = state.valve_forced;
  double remaining = dt;
  // At most two crossings fit into one step for any sane configuration; the
  // bound only guards against a zero-width band.
  for (int guard = 0; remaining > 0.0 && guard < 16; ++guard) {
    const double rate = (s.pump_on ? config.pump_rate_lps : 0.0) -
                        ((s.valve_open || forced) ? config.valve_rate_lps : 0.0);
    double to_event = std::numeric_limits<double>::infinity();
    if (s.phase == Phase::Filling && rate > 0.0) {
      to_event = (config.level_high_l - s.level2_l) / rate;
    } else if (s.phase == Phase::Draining && rate < 0.0) {
      to_event = (s.level2_l - config.level_low_l) / -rate;
    }
    if (to_event <= remaining) {
      s.level2_l = s.phase == Phase::Filling ? config.level_high_l : config.level_low_l;
      remaining -= std::max(to_event, 0.0);
      s.phase = s.phase == Phase::Filling ? Phase::Draining : Phase::Filling;
      apply_controller(s);
    } else {
      s.level2_l += rate * remaining;
      remaining = 0.0;
    }
  }

  if (s.level2_l < -kLevelTolerance || s.level2_l > config.container_capacity_l + kLevelTolerance) {
    std::ostringstream msg;
    msg << "container 2 level " << s.level2_l << " L outside [0, "
        << config.container_capacity_l << "] at t=" << state.t_s + dt << " s";
    throw NonPhysical(msg.str());
  }
  s.level1_l = config.total_water_l - s.level2_l;
  if (s.level1_l < -kLevelTolerance || s.level1_l > config.container_capacity_l + kLevelTolerance) {
    std::ostringstream msg;
    msg << "container 1 level " << s.level1_l << " L outside [0, "
        << config.container_capacity_l << "] at t=" << state.t_s + dt << " s";
    throw NonPhysical(msg.str());
  }

  s.t_s = state.t_s + dt;
  s.valve_forced = false;
  s.flow_lps = s.pump_on ? config.pump_rate_lps : 0.0;
  s.temp_c = config.ambient_temp_c;
  return s;
}

SensorFrame read_sensors(const ProcessState& state, const PlantConfig& config,
                         SensorNoise& noise, const SensorFrame* previous) {
  // Fixed draw order: flow, level1, level2, temp.
  const double n_flow = noise.draw();
  const double n_level1 = noise.draw();
  const double n_level2 = noise.draw();
  const double n_temp = noise.draw();
  const double sigma = config.noise_sigma;

  SensorFrame f;
  f.t_s = state.t_s;
  f.flow = state.flow_lps;
  f.level1 = state.level1_l;
  f.level2 = state.level2_l;
  f.temp = state.temp_c;
  if (sigma > 0.0) {
    f.flow += n_flow * sigma * config.flow_full_scale();
    f.level1 += n_level1 * sigma * config.level_full_scale();
    f.level2 += n_level2 * sigma * config.level_full_scale();
    f.temp += n_temp * sigma * PlantConfig::temp_full_scale;
  }

  // Capacitive switches follow the sensed level. The hysteresis band only
  // matters when readings are noisy.
  const double band = sigma > 0.0 ? config.hysteresis_frac * config.container_capacity_l : 0.0;
  const bool was_high = previous != nullptr && previous->high2;
  const bool was_low = previous != nullptr && previous->low2;
  f.high2 = was_high ? f.level2 >= config.level_high_l - band : f.level2 >= config.level_high_l;
  f.low2 = was_low ? f.level2 <= config.level_low_l + band : f.level2 <= config.level_low_l;

  f.valve_reported = state.valve_open || state.valve_forced;
  f.pump_reported = state.pump_on;
  return f;
}

}  // namespace icsad
