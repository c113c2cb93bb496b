#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "icsad/errors.hpp"
#include "icsad/lstm.hpp"
#include "test_support.hpp"

using namespace icsad;
namespace t = icsad::testing;

namespace {

LstmConfig tiny(std::vector<int> layers, int input_len, int input_dim, std::uint64_t seed) {
  LstmConfig c;
  c.layer_sizes = std::move(layers);
  c.input_len = input_len;
  c.input_dim = input_dim;
  c.seed = seed;
  return c;
}

LstmConfig small_training(int input_dim) {
  LstmConfig c;
  c.layer_sizes = {8};
  c.input_len = 12;
  c.input_dim = input_dim;
  c.window_stride = 1;
  c.batch_size = 16;
  c.epochs = 25;
  c.learning_rate = 0.01;
  c.lr_decay = 1.0;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(LstmConfig{}.validate());
  CHECK(LstmConfig::full_scale().layer_sizes == std::vector<int>{350, 350, 250});
  LstmConfig c;
  SUBCASE("no layers") { c.layer_sizes.clear(); }
  SUBCASE("zero width") { c.layer_sizes = {4, 0}; }
  SUBCASE("zero input length") { c.input_len = 0; }
  SUBCASE("non-positive learning rate") { c.learning_rate = 0.0; }
  SUBCASE("zero epochs") { c.epochs = 0; }
  SUBCASE("decay above one") { c.lr_decay = 1.5; }
  SUBCASE("zero stride") { c.window_stride = 0; }
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("parameter shapes follow the config") {
  const auto cfg = tiny({4, 3}, 5, 2, 1);
  const auto model = LstmModel::initialise(cfg);
  REQUIRE(model.layers.size() == 2);
  CHECK(model.layers[0].w.rows() == 16);
  CHECK(model.layers[0].w.cols() == 2);
  CHECK(model.layers[1].w.cols() == 4);
  CHECK(model.layers[1].u.rows() == 12);
  CHECK(model.dense_w.rows() == 2);
  CHECK(model.dense_w.cols() == 3);
  const std::size_t expected = (16 * 2 + 16 * 4 + 16) + (12 * 4 + 12 * 3 + 12) + (2 * 3 + 2);
  CHECK(model.parameter_count() == expected);
  CHECK(model.parameters().size() == expected);
  // Forget gate biases start at one.
  CHECK(model.layers[0].b.segment(4, 4).isOnes());
}

TEST_CASE("gradient check on ten random tiny networks") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 gen(seed);
    std::vector<int> layers;
    const int depth = 1 + static_cast<int>(gen() % 3);
    for (int l = 0; l < depth; ++l) layers.push_back(2 + static_cast<int>(gen() % 4));
    const int input_len = 2 + static_cast<int>(gen() % 5);
    const int input_dim = 1 + static_cast<int>(gen() % 3);
    const auto cfg = tiny(layers, input_len, input_dim, seed);
    const auto sample = random_batch(input_len, input_dim, 3, seed + 1000);
    const auto check = gradient_check(cfg, sample);
    CHECK_MESSAGE(check.max_relative_deviation <= 1e-4,
                  "seed " << seed << " deviation " << check.max_relative_deviation);
    CHECK(check.parameters == LstmModel::initialise(cfg).parameter_count());
  }
}

TEST_CASE("loss_and_gradient agrees with an independent directional difference") {
  const auto cfg = tiny({5, 4}, 6, 2, 99);
  LstmModel model = LstmModel::initialise(cfg);
  const auto batch = random_batch(6, 2, 4, 5);
  std::vector<double> grad;
  loss_and_gradient(model, batch, grad);
  const auto base = model.parameters();
  const auto dir = t::white_noise(base.size(), 17);
  double analytic = 0.0;
  for (std::size_t p = 0; p < base.size(); ++p) analytic += grad[p] * dir[p];
  auto loss_at = [&](double step) {
    auto p = base;
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += step * dir[k];
    LstmModel m = model;
    m.set_parameters(p);
    const Eigen::MatrixXd y = forward(m, batch);
    return (y - batch.targets).squaredNorm() / static_cast<double>(y.size());
  };
  const double h = 1e-6;
  const double numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
  CHECK(analytic == doctest::Approx(numeric).epsilon(1e-6));
}

TEST_CASE("zero weights on zero input give exactly zero gradients") {
  const auto cfg = tiny({4, 3}, 5, 2, 3);
  LstmModel model = LstmModel::initialise(cfg);
  model.set_parameters(std::vector<double>(model.parameter_count(), 0.0));
  WindowBatch batch;
  batch.inputs.assign(5, Eigen::MatrixXd::Zero(2, 3));
  batch.targets = Eigen::MatrixXd::Zero(2, 3);
  std::vector<double> grad;
  CHECK(loss_and_gradient(model, batch, grad) == 0.0);
  CHECK(std::all_of(grad.begin(), grad.end(), [](double g) { return g == 0.0; }));
}

TEST_CASE("gradient check is deterministic") {
  const auto cfg = tiny({3, 2}, 4, 2, 11);
  const auto sample = random_batch(4, 2, 2, 12);
  CHECK(gradient_check(cfg, sample).max_relative_deviation ==
        gradient_check(cfg, sample).max_relative_deviation);
}

TEST_CASE("batch shape mismatches are rejected") {
  const auto model = LstmModel::initialise(tiny({3}, 4, 2, 1));
  const auto wrong = random_batch(4, 3, 2, 1);
  CHECK_THROWS_AS(forward(model, wrong), ShapeMismatch);
  LstmModel copy = model;
  CHECK_THROWS_AS(copy.set_parameters(std::vector<double>(3, 0.0)), ShapeMismatch);
}

TEST_CASE("normalisation round trip") {
  const Channels x{t::random_walk(500, 1), t::white_noise(500, 2, 1e3), std::vector<double>(500, 7.0)};
  const auto norm = Normalization::fit(x);
  CHECK(norm.std[2] == 1.0);
  const auto back = norm.denormalize(norm.normalize(x));
  for (std::size_t c = 0; c < x.size(); ++c)
    for (std::size_t i = 0; i < x[c].size(); ++i) CHECK(std::abs(back[c][i] - x[c][i]) <= 1e-9);
  const auto z = norm.normalize(x);
  double mean = 0.0;
  for (double v : z[0]) mean += v;
  CHECK(std::abs(mean / 500.0) < 1e-12);
}

TEST_CASE("forward pass stays finite for large bounded inputs") {
  const auto model = LstmModel::initialise(tiny({16, 8}, 30, 2, 4));
  for (double scale : {1.0, 1e3, 1e6}) {
    auto batch = random_batch(30, 2, 8, 9);
    for (auto& m : batch.inputs) m *= scale;
    CHECK(forward(model, batch).allFinite());
  }
}

TEST_CASE("training on a constant series predicts the constant") {
  const Channels x{std::vector<double>(400, 0.25)};
  auto cfg = small_training(1);
  cfg.epochs = 40;
  const auto model = train(cfg, x);
  CHECK(model.epoch_losses.back() < 1e-6);
  const auto run = predict_run(model, x);
  for (double p : run.predictions[0]) CHECK(std::abs(p - 0.25) < 1e-3);
}

TEST_CASE("training is deterministic per seed") {
  const Channels x{t::sine(300, 37.0), t::random_walk(300, 3)};
  const auto cfg = small_training(2);
  const auto a = train(cfg, x);
  const auto b = train(cfg, x);
  CHECK(a.parameters() == b.parameters());
  CHECK(a.epoch_losses == b.epoch_losses);
  auto other = cfg;
  other.seed = cfg.seed + 1;
  CHECK(train(other, x).parameters() != a.parameters());
}

TEST_CASE("plain SGD also reduces the loss") {
  const Channels x{t::sine(300, 37.0)};
  auto cfg = small_training(1);
  cfg.optimizer = Optimizer::Sgd;
  cfg.learning_rate = 0.1;
  const auto model = train(cfg, x);
  CHECK(model.epoch_losses.back() < model.epoch_losses.front());
}

TEST_CASE("training input validation") {
  const auto cfg = small_training(2);
  CHECK_THROWS_AS(train(cfg, Channels{t::sine(300, 37.0)}), ShapeMismatch);
  CHECK_THROWS_AS(train(cfg, Channels{t::sine(13, 5.0), t::sine(13, 5.0)}), ShapeMismatch);
  auto exploding = cfg;
  exploding.optimizer = Optimizer::Sgd;
  exploding.clip_norm = 0.0;
  exploding.learning_rate = 1e12;
  CHECK_THROWS_AS(train(exploding, Channels{t::sine(300, 37.0), t::random_walk(300, 1)}),
                  NonFiniteLoss);
}

TEST_CASE("predict_run shapes") {
  const Channels x{t::sine(200, 37.0), t::sine(200, 23.0)};
  const auto model = train(small_training(2), x);
  const auto run = predict_run(model, x);
  CHECK(run.valid_from == 12);
  CHECK(run.frames == 200);
  CHECK(run.predictions[1].size() == 188);
  CHECK(run.errors[0].size() == 188);
  for (const auto& e : run.errors)
    CHECK(std::all_of(e.begin(), e.end(), [](double v) { return v >= 0.0 && std::isfinite(v); }));

  const Channels exact{Channels{std::vector<double>(x[0].begin(), x[0].begin() + 12),
                                std::vector<double>(x[1].begin(), x[1].begin() + 12)}};
  const auto empty = predict_run(model, exact);
  CHECK(empty.predictions[0].empty());
  CHECK(lstm_score(empty).size() == 12);

  CHECK_THROWS_AS(predict_run(model, Channels{x[0]}), ShapeMismatch);
  CHECK(predict_run(model, x).predictions == run.predictions);
}

TEST_CASE("lstm_score") {
  PredictionRun run;
  run.valid_from = 2;
  run.frames = 6;
  SUBCASE("perfect predictions") {
    run.errors = {std::vector<double>(4, 0.0), std::vector<double>(4, 0.0)};
    CHECK(lstm_score(run) == std::vector<double>(6, 0.0));
  }
  SUBCASE("one channel erring") {
    run.errors = {{0.0, 0.0, 0.0, 0.0}, {0.5, 0.1, 0.7, 0.2}};
    CHECK(lstm_score(run) == std::vector<double>{0.5, 0.5, 0.5, 0.1, 0.7, 0.2});
  }
  SUBCASE("maximum over channels") {
    run.errors = {{0.3, 0.0, 0.0, 0.9}, {0.1, 0.2, 0.0, 0.2}};
    CHECK(lstm_score(run) == std::vector<double>{0.3, 0.3, 0.3, 0.2, 0.0, 0.9});
  }
}

TEST_CASE("model save and load round trip exactly") {
  t::TempDir dir("lstm");
  const Channels x{t::sine(200, 37.0), t::sine(200, 23.0)};
  const auto model = train(small_training(2), x);
  save_model(model, dir.path() / "model.json");
  const auto back = load_model(dir.path() / "model.json");
  CHECK(back.config == model.config);
  CHECK(back.parameters() == model.parameters());
  CHECK(back.norm.mean == model.norm.mean);
  CHECK(back.norm.std == model.norm.std);
  CHECK(back.epoch_losses == model.epoch_losses);
  CHECK(predict_run(back, x).predictions == predict_run(model, x).predictions);

  CHECK_THROWS_AS(load_model(dir.path() / "absent.json"), IoFailure);
  std::ofstream(dir.path() / "junk.json") << R"({"format": "other"})";
  CHECK_THROWS_AS(load_model(dir.path() / "junk.json"), SchemaMismatch);
}
