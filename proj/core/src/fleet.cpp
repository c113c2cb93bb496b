#include <future>
#include <random>

#include "icsad/errors.hpp"
#include "icsad/simulate.hpp"

namespace icsad {

namespace {

constexpr double kRateJitter = 0.02;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<PlantConfig> fleet_configs(const PlantConfig& base_config) {
  std::vector<PlantConfig> configs(kFleetSize, base_config);
  for (int k = 2; k <= kFleetSize; ++k) {
    PlantConfig& c = configs[k - 1];
    c.rng_seed = splitmix64(base_config.rng_seed ^ (static_cast<std::uint64_t>(k) << 32));
    std::mt19937_64 engine(splitmix64(c.rng_seed));
    std::uniform_real_distribution<double> jitter(-kRateJitter, kRateJitter);
    c.pump_rate_lps *= 1.0 + jitter(engine);
    c.valve_rate_lps *= 1.0 + jitter(engine);
  }
  return configs;
}

std::vector<Trace> generate_fleet(const PlantConfig& base_config, const AttackScript* script,
                                  int attacked_plc, double duration_s) {
  if (attacked_plc < 1 || attacked_plc > kFleetSize)
    throw ConfigError("attacked PLC must be in 1.." + std::to_string(kFleetSize));

  const auto configs = fleet_configs(base_config);
  std::vector<std::future<Trace>> jobs;
  jobs.reserve(configs.size());
  for (int k = 1; k <= kFleetSize; ++k) {
    const AttackScript* s = k == attacked_plc ? script : nullptr;
    jobs.push_back(std::async(std::launch::async, [&configs, k, s, duration_s] {
      return simulate(configs[k - 1], duration_s, s, k);
    }));
  }
  std::vector<Trace> traces;
  traces.reserve(jobs.size());
  for (auto& job : jobs) traces.push_back(job.get());
  return traces;
}

}  // namespace icsad
