#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "icsad/errors.hpp"
#include "icsad/matrix_profile.hpp"
#include "icsad/process_sim.hpp"
#include "icsad/simulate.hpp"
#include "test_support.hpp"

using namespace icsad;
using icsad::testing::brute_acf;
using icsad::testing::first_local_max;
using icsad::testing::mean_edge_spacing;

namespace {

PlantConfig noiseless() {
  PlantConfig c;
  c.noise_sigma = 0.0;
  return c;
}

// Closed-form cycle period from the plant's net rates.
double closed_form_period(const PlantConfig& c) {
  const double band = c.level_high_l - c.level_low_l;
  return band / c.pump_rate_lps + band / c.valve_rate_lps;
}

std::vector<double> noiseless_flow(double duration_s) {
  const auto r = simulate_detailed(noiseless(), duration_s);
  std::vector<double> flow;
  for (const auto& s : r.truth) flow.push_back(s.flow_lps);
  return flow;
}

}  // namespace

TEST_CASE("default config validates and its closed-form period is 150 s") {
  PlantConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.cycle_period_s() == doctest::Approx(closed_form_period(c)).epsilon(1e-12));
  CHECK(std::abs(c.cycle_period_s() - 150.0) < 0.1);
}

TEST_CASE("invalid configs are rejected") {
  PlantConfig c;
  SUBCASE("valve faster than pump") { c.valve_rate_lps = 0.2; }
  SUBCASE("thresholds inverted") { c.level_low_l = 9.0; }
  SUBCASE("high above capacity") { c.level_high_l = 11.0; }
  SUBCASE("zero sample rate") { c.sample_rate_hz = 0.0; }
  SUBCASE("negative noise") { c.noise_sigma = -0.1; }
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("crossing the high mark while filling switches to draining") {
  const PlantConfig c = noiseless();
  ProcessState s = ProcessState::initial(c);
  s.level2_l = c.level_high_l - 1e-6;
  s.level1_l = c.total_water_l - s.level2_l;
  s.phase = Phase::Filling;
  s.pump_on = true;
  s.valve_open = false;
  const ProcessState next = step(s, c, c.sample_period_s());
  CHECK(next.phase == Phase::Draining);
  CHECK_FALSE(next.pump_on);
  CHECK(next.valve_open);
}

TEST_CASE("step rejects a non-positive dt and levels outside the container") {
  const PlantConfig c = noiseless();
  ProcessState s = ProcessState::initial(c);
  CHECK_THROWS_AS(step(s, c, 0.0), ConfigError);
  PlantConfig tiny = c;
  tiny.total_water_l = 5.0;  // container 1 runs dry before container 2 fills
  ProcessState t = ProcessState::initial(tiny);
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 1000; ++i) t = step(t, tiny, tiny.sample_period_s());
      }(),
      NonPhysical);
}

TEST_CASE("noiseless simulated period matches the closed form within one sample") {
  const auto r = simulate_detailed(noiseless(), 3600.0);
  std::vector<std::uint8_t> pump;
  for (const auto& s : r.truth) pump.push_back(s.pump_on ? 1 : 0);
  const double spacing_s = mean_edge_spacing(pump) * 0.5;
  CHECK(std::abs(spacing_s - closed_form_period(noiseless())) <= 0.5);
}

TEST_CASE("noiseless flow autocorrelation peaks first at 150 s") {
  const auto flow = noiseless_flow(3600.0);
  const auto acf = brute_acf(flow, 600);
  const std::size_t lag = first_local_max(acf, 0.2);
  CHECK(std::abs(static_cast<double>(lag) - 300.0) <= 1.0);
}

TEST_CASE("open valve while filling stretches the fill phase to about 180 s") {
  const PlantConfig c = noiseless();
  AttackScript script{{AttackDirective::open_valve(0, kEndOfTrace)}};
  const auto r = simulate_detailed(c, 400.0, &script);
  // Container 2 starts at the low mark with the pump running.
  std::size_t fill_frames = 0;
  while (fill_frames < r.truth.size() && r.truth[fill_frames].phase == Phase::Filling)
    ++fill_frames;
  const double expected = (c.level_high_l - c.level_low_l) / (c.pump_rate_lps - c.valve_rate_lps);
  CHECK(std::abs(fill_frames * c.sample_period_s() - expected) <= 0.5);
  CHECK(std::abs(expected - 180.0) < 0.5);
}

TEST_CASE("water is conserved on every noiseless frame") {
  const PlantConfig c = noiseless();
  const auto script = canonical_scenario();
  const auto r = simulate_detailed(c, 7200.0, &script);
  double worst = 0.0;
  for (const auto& s : r.truth)
    worst = std::max(worst, std::abs(s.level1_l + s.level2_l - c.total_water_l));
  CHECK(worst < 1e-9);
}

TEST_CASE("zero noise readout equals the physical truth") {
  const PlantConfig c = noiseless();
  SensorNoise noise(1);
  ProcessState s = ProcessState::initial(c);
  for (int i = 0; i < 400; ++i) {
    const SensorFrame f = read_sensors(s, c, noise);
    CHECK(f.flow == s.flow_lps);
    CHECK(f.level1 == s.level1_l);
    CHECK(f.level2 == s.level2_l);
    CHECK(f.temp == s.temp_c);
    CHECK(f.pump_reported == s.pump_on);
    CHECK(f.valve_reported == s.valve_open);
    CHECK(f.high2 == (s.level2_l >= c.level_high_l));
    CHECK(f.low2 == (s.level2_l <= c.level_low_l));
    s = step(s, c, c.sample_period_s());
  }
}

TEST_CASE("fresh noise streams with the same seed give identical frames") {
  const PlantConfig c;
  const ProcessState s = ProcessState::initial(c);
  SensorNoise a(99), b(99);
  CHECK(read_sensors(s, c, a) == read_sensors(s, c, b));
}

TEST_CASE("flow noise std is within 10% of sigma times full scale") {
  const PlantConfig c;
  const ProcessState s = ProcessState::initial(c);
  SensorNoise noise(c.rng_seed);
  double sum = 0.0, sum2 = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double v = read_sensors(s, c, noise).flow - s.flow_lps;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  const double expected = c.noise_sigma * c.flow_full_scale();
  CHECK(std::abs(sd - expected) <= 0.1 * expected);
}

TEST_CASE("one hour at 2 Hz is 7200 frames, all normal without a script") {
  const Trace t = simulate(PlantConfig{}, 3600.0);
  CHECK(t.size() == 7200);
  CHECK(std::all_of(t.labels.begin(), t.labels.end(), [](Label l) { return l == Label::Normal; }));
}

TEST_CASE("scripted open valve labels exactly frames 4200..4799") {
  AttackScript script{{AttackDirective::open_valve(4200, 4800)}};
  const Trace t = simulate(PlantConfig{}, 3600.0, &script);
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(t.labels[i] == ((i >= 4200 && i < 4800) ? Label::OpenValve : Label::Normal));
}

TEST_CASE("every noiseless 300-sample flow window contains pump activity") {
  const auto flow = noiseless_flow(3600.0);
  std::size_t last_on = 0;
  bool seen = false;
  for (std::size_t i = 0; i < flow.size(); ++i) {
    if (flow[i] > 0.0) {
      last_on = i;
      seen = true;
    }
    if (i + 1 >= 300) {
      REQUIRE(seen);
      CHECK(last_on + 300 > i);  // an on-sample lies in [i - 299, i]
    }
  }
}

TEST_CASE("identical config and script give bit-identical traces") {
  const auto script = canonical_scenario();
  CHECK(simulate(PlantConfig{}, 3600.0, &script) == simulate(PlantConfig{}, 3600.0, &script));
  PlantConfig other;
  other.rng_seed = 43;
  CHECK_FALSE(simulate(PlantConfig{}, 600.0) == simulate(other, 600.0));
}

TEST_CASE("property: conservation holds for random valid configs") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    PlantConfig c;
    c.noise_sigma = 0.0;
    c.pump_rate_lps = 0.05 + 0.2 * u(gen);
    c.valve_rate_lps = c.pump_rate_lps * (0.2 + 0.7 * u(gen));
    c.level_low_l = 1.0 + 2.0 * u(gen);
    c.level_high_l = c.level_low_l + 2.0 + 4.0 * u(gen);
    c.sample_rate_hz = 1.0 + 3.0 * u(gen);
    REQUIRE_NOTHROW(c.validate());
    const auto r = simulate_detailed(c, 2.5 * c.cycle_period_s());
    for (const auto& s : r.truth) {
      REQUIRE(std::abs(s.level1_l + s.level2_l - c.total_water_l) < 1e-9);
      REQUIRE(s.level2_l >= c.level_low_l - 1e-9);
      REQUIRE(s.level2_l <= c.level_high_l + 1e-9);
    }
  }
}
