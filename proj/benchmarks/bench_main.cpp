#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "icsad/lstm.hpp"
#include "icsad/matrix_profile.hpp"
#include "icsad/simulate.hpp"

namespace {

std::vector<double> random_walk(std::size_t n) {
  std::mt19937_64 engine(1);
  std::normal_distribution<double> normal;
  std::vector<double> x(n);
  double acc = 0.0;
  for (double& v : x) v = acc += normal(engine);
  return x;
}

void BM_MpFast(benchmark::State& state) {
  const auto x = random_walk(static_cast<std::size_t>(state.range(0)));
  const auto cfg = icsad::MpConfig::for_window(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(icsad::mp_fast(x, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MpFast)
    ->Args({1000, 300})
    ->Args({2000, 300})
    ->Args({4000, 300})
    ->Args({7200, 300})
    ->Unit(benchmark::kMillisecond)
    ->Complexity(benchmark::oNSquared);

void BM_MpBrute(benchmark::State& state) {
  const auto x = random_walk(static_cast<std::size_t>(state.range(0)));
  const auto cfg = icsad::MpConfig::for_window(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(icsad::mp_brute(x, cfg));
}
BENCHMARK(BM_MpBrute)->Args({1000, 50})->Args({2000, 150})->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const auto script = icsad::canonical_scenario();
  for (auto _ : state)
    benchmark::DoNotOptimize(icsad::simulate(icsad::PlantConfig{}, 3600.0, &script));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

void BM_LstmForward(benchmark::State& state) {
  icsad::LstmConfig cfg;
  const auto model = icsad::LstmModel::initialise(cfg);
  const auto batch = icsad::random_batch(cfg.input_len, cfg.input_dim,
                                         static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(icsad::forward(model, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LstmForward)->Arg(1)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_LstmTrainStep(benchmark::State& state) {
  icsad::LstmConfig cfg;
  const auto model = icsad::LstmModel::initialise(cfg);
  const auto batch = icsad::random_batch(cfg.input_len, cfg.input_dim, cfg.batch_size, 4);
  std::vector<double> grad;
  for (auto _ : state) benchmark::DoNotOptimize(icsad::loss_and_gradient(model, batch, grad));
}
BENCHMARK(BM_LstmTrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
