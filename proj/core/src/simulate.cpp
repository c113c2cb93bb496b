#include "icsad/simulate.hpp"

#include <cmath>

#include "icsad/errors.hpp"

namespace icsad {

SimulationResult simulate_detailed(const PlantConfig& config, double duration_s,
                                   const AttackScript* script, int plc_id) {
  config.validate();
  if (!(duration_s >= config.cycle_period_s()))
    throw ConfigError("simulation must cover at least one cycle period (" +
                      std::to_string(config.cycle_period_s()) + " s)");

  const auto frames = static_cast<std::size_t>(std::ceil(duration_s * config.sample_rate_hz));
  if (script != nullptr) script->validate(frames);
  const double dt = config.sample_period_s();

  SimulationResult result;
  Trace& trace = result.trace;
  trace.sample_rate_hz = config.sample_rate_hz;
  trace.plc_id = plc_id;
  trace.manifest.config = config;
  trace.manifest.seed = config.rng_seed;
  if (script != nullptr) trace.manifest.script = *script;
  result.truth.reserve(frames);

  SensorNoise noise(config.rng_seed);
  ProcessState state = ProcessState::initial(config);
  SensorFrame previous;
  for (std::size_t k = 0; k < frames; ++k) {
    state.t_s = static_cast<double>(k) * dt;
    const AttackDirective* directive = script != nullptr ? script->active(k) : nullptr;
    if (directive != nullptr) state = override_actuators(*directive, state, k);

    SensorFrame frame = read_sensors(state, config, noise, k == 0 ? nullptr : &previous);
    Label label = Label::Normal;
    if (directive != nullptr) {
      frame = spoof_report(*directive, frame, k);
      label = label_for(directive->attack_id);
    }
    trace.push_back(frame, label);
    result.truth.push_back(state);
    previous = frame;
    state = step(state, config, dt);
  }
  return result;
}

Trace simulate(const PlantConfig& config, double duration_s, const AttackScript* script,
               int plc_id) {
  return simulate_detailed(config, duration_s, script, plc_id).trace;
}

}  // namespace icsad
