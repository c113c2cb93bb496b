#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "icsad/trace.hpp"

namespace icsad {

enum class Optimizer { Adam, Sgd };

struct LstmConfig {
  std::vector<int> layer_sizes{64, 64, 32};
  int input_len = 300;
  int input_dim = 2;
  double learning_rate = 0.001;
  int epochs = 25;
  int batch_size = 32;
  // One training window per `window_stride` frames, placed at a seeded
  // random offset inside its slot.
  int window_stride = 40;
  double clip_norm = 5.0;  // global gradient-norm clip; 0 disables
  double lr_decay = 0.85;  // learning rate multiplier applied after each epoch
  Optimizer optimizer = Optimizer::Adam;
  std::uint64_t seed = 7;

  // Three stacked layers of 350, 350 and 250 cells.
  static LstmConfig full_scale();
  void validate() const;  // throws ConfigError

  bool operator==(const LstmConfig&) const = default;
};

// Per-channel z-normalisation fitted on training data.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> std;

  static Normalization fit(const Channels& channels);
  double normalize(std::size_t channel, double v) const { return (v - mean[channel]) / std[channel]; }
  double denormalize(std::size_t channel, double z) const { return z * std[channel] + mean[channel]; }
  Channels normalize(const Channels& channels) const;
  Channels denormalize(const Channels& channels) const;
};

// One LSTM layer. Gate rows are stacked [input; forget; cell; output].
struct LstmLayer {
  Eigen::MatrixXd w;  // 4H x input
  Eigen::MatrixXd u;  // 4H x H
  Eigen::VectorXd b;  // 4H

  int hidden() const { return static_cast<int>(u.cols()); }
};

struct LstmModel {
  LstmConfig config;
  std::vector<LstmLayer> layers;
  Eigen::MatrixXd dense_w;  // input_dim x H_last
  Eigen::VectorXd dense_b;
  Normalization norm;
  std::vector<double> epoch_losses;  // mean batch loss per training epoch

  // Random initialisation from config.seed; identity normalisation.
  static LstmModel initialise(const LstmConfig& config);
  std::size_t parameter_count() const;
  // All parameters in a fixed order: per layer w, u, b, then dense w, b.
  std::vector<double> parameters() const;
  void set_parameters(const std::vector<double>& flat);
};

// A batch of independent normalised windows. inputs[t] is input_dim x B.
struct WindowBatch {
  std::vector<Eigen::MatrixXd> inputs;
  Eigen::MatrixXd targets;  // input_dim x B
};

// Forward pass only; returns input_dim x B normalised predictions.
Eigen::MatrixXd forward(const LstmModel& model, const WindowBatch& batch);

// Mean squared error of the batch and its gradient in parameters() order.
double loss_and_gradient(const LstmModel& model, const WindowBatch& batch,
                         std::vector<double>& gradient);

// Trains on attack-free channels: z-normalises with training statistics,
// cuts windows of input_len frames predicting the next frame, and minimises
// MSE. Throws NonFiniteLoss on divergence.
LstmModel train(const LstmConfig& config, const Channels& normal_channels);

struct PredictionRun {
  Channels predictions;  // per channel, original units, frames [valid_from, n)
  Channels errors;       // |prediction - actual| per channel, normalised units
  std::size_t valid_from = 0;
  std::size_t frames = 0;
};

// One-step-ahead predictions for every frame t >= input_len from frames
// [t - input_len, t). Throws ShapeMismatch on a channel-count mismatch.
PredictionRun predict_run(const LstmModel& model, const Channels& channels);

// Max over channels of the normalised absolute error, length `frames`;
// frames before valid_from repeat the first valid score.
std::vector<double> lstm_score(const PredictionRun& run);

struct GradientCheck {
  double max_relative_deviation = 0.0;
  std::size_t parameters = 0;
};

// Compares the analytic BPTT gradient with central differences (h = 1e-5)
// on every parameter of a freshly initialised model. The relative deviation
// |a - n| / max(|a|, |n|, 1e-6) is maximised over parameters.
GradientCheck gradient_check(const LstmConfig& config, const WindowBatch& sample);

// Random small batch for gradient checks, reproducible from `seed`.
WindowBatch random_batch(int input_len, int input_dim, int batch, std::uint64_t seed);

void save_model(const LstmModel& model, const std::filesystem::path& path);
LstmModel load_model(const std::filesystem::path& path);  // throws IoFailure, SchemaMismatch

}  // namespace icsad
