#pragma once

#include <vector>

#include "icsad/attack.hpp"
#include "icsad/process_sim.hpp"
#include "icsad/trace.hpp"

namespace icsad {

struct SimulationResult {
  Trace trace;
  std::vector<ProcessState> truth;  // physical state behind each frame
};

// Runs ceil(duration_s * sample_rate_hz) frames. Attack directives act on
// the state before sensor readout; the trace carries per-frame labels.
SimulationResult simulate_detailed(const PlantConfig& config, double duration_s,
                                   const AttackScript* script = nullptr, int plc_id = 1);

Trace simulate(const PlantConfig& config, double duration_s,
               const AttackScript* script = nullptr, int plc_id = 1);

inline constexpr int kFleetSize = 5;

// Instance 1 runs base_config unchanged. Instances 2..5 draw their own seed
// from the base seed and jitter both rates by up to +-2%. Only
// `attacked_plc` receives the script.
std::vector<PlantConfig> fleet_configs(const PlantConfig& base_config);
std::vector<Trace> generate_fleet(const PlantConfig& base_config, const AttackScript* script,
                                  int attacked_plc, double duration_s);

}  // namespace icsad
