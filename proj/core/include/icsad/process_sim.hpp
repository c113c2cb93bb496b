#pragma once

#include <cstdint>
#include <random>

namespace icsad {

// Two-container plant: pump P101 moves water from container 1 to container 2,
// solenoid valve M102 drains container 2 back into container 1.
struct PlantConfig {
  double container_capacity_l = 10.0;
  double level_low_l = 2.0;
  double level_high_l = 8.0;
  double pump_rate_lps = 0.10;
  double valve_rate_lps = 0.0667;
  double total_water_l = 10.0;
  double sample_rate_hz = 2.0;
  double noise_sigma = 0.005;  // fraction of each channel's full scale
  double ambient_temp_c = 21.0;
  double hysteresis_frac = 0.01;  // of capacity, for the B113/B114 switches
  std::uint64_t rng_seed = 42;

  // Throws ConfigError when an invariant is violated.
  void validate() const;

  double sample_period_s() const { return 1.0 / sample_rate_hz; }
  // Noiseless period of one fill/drain cycle without attacks.
  double cycle_period_s() const;

  double flow_full_scale() const { return pump_rate_lps; }
  double level_full_scale() const { return container_capacity_l; }
  static constexpr double temp_full_scale = 100.0;

  bool operator==(const PlantConfig&) const = default;
};

enum class Phase { Filling, Draining };

struct ProcessState {
  double t_s = 0.0;
  double level1_l = 0.0;
  double level2_l = 0.0;
  double flow_lps = 0.0;  // B102
  bool pump_on = false;   // M101/P101
  bool valve_open = false;  // M102
  // Set by actuator injection; holds the valve open for the next step only.
  bool valve_forced = false;
  double temp_c = 0.0;  // B104
  Phase phase = Phase::Filling;

  // Container 2 at the low mark, pump running.
  static ProcessState initial(const PlantConfig& config);

  bool operator==(const ProcessState&) const = default;
};

struct SensorFrame {
  double t_s = 0.0;
  double flow = 0.0;
  double level1 = 0.0;  // S111
  double level2 = 0.0;  // S112
  bool high2 = false;   // B113
  bool low2 = false;    // B114
  bool valve_reported = false;
  bool pump_reported = false;
  double temp = 0.0;

  bool operator==(const SensorFrame&) const = default;
};

// Advances the plant by dt seconds. Threshold crossings inside the step are
// located exactly and the controller switches phase at the crossing, so the
// piecewise-linear level trajectory carries no discretisation error.
// Throws NonPhysical if a level would leave [0, capacity].
ProcessState step(const ProcessState& state, const PlantConfig& config, double dt);

// Gaussian noise source for the analog channels. Every readout consumes the
// same number of draws, independent of plant state and noise level.
class SensorNoise {
 public:
  explicit SensorNoise(std::uint64_t seed) : engine_(seed) {}
  double draw() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Reads all sensors. `previous` carries the threshold-switch memory used for
// hysteresis; pass nullptr for the first frame. With noise_sigma == 0 the
// frame equals the physical truth and the switches compare levels exactly.
SensorFrame read_sensors(const ProcessState& state, const PlantConfig& config,
                         SensorNoise& noise, const SensorFrame* previous = nullptr);

}  // namespace icsad
