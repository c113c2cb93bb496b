#include "icsad/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "icsad/errors.hpp"

namespace icsad {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Configuration and parameters

LstmConfig LstmConfig::full_scale() {
  LstmConfig c;
  c.layer_sizes = {350, 350, 250};
  return c;
}

void LstmConfig::validate() const {
  if (layer_sizes.empty()) throw ConfigError("LSTM needs at least one layer");
  for (int h : layer_sizes)
    if (h < 1) throw ConfigError("LSTM layer widths must be >= 1");
  if (input_len < 1) throw ConfigError("input_len must be >= 1");
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (window_stride < 1) throw ConfigError("window_stride must be >= 1");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be non-negative");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr_decay must be in (0, 1]");
}

Normalization Normalization::fit(const Channels& channels) {
  Normalization n;
  for (const auto& c : channels) {
    if (c.empty()) throw ShapeMismatch("cannot normalise an empty channel");
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
    double ss = 0.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(c.size()));
    // A flat channel keeps unit scale so that normalisation stays invertible.
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) sd = 1.0;
    n.mean.push_back(mean);
    n.std.push_back(sd);
  }
  return n;
}

Channels Normalization::normalize(const Channels& channels) const {
  Channels out = channels;
  for (std::size_t c = 0; c < out.size(); ++c)
    for (double& v : out[c]) v = normalize(c, v);
  return out;
}

Channels Normalization::denormalize(const Channels& channels) const {
  Channels out = channels;
  for (std::size_t c = 0; c < out.size(); ++c)
    for (double& v : out[c]) v = denormalize(c, v);
  return out;
}

LstmModel LstmModel::initialise(const LstmConfig& config) {
  config.validate();
  LstmModel model;
  model.config = config;
  std::mt19937_64 engine(config.seed);
  auto fill = [&engine](MatrixXd& m, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = u(engine);
  };

  int in = config.input_dim;
  for (int h : config.layer_sizes) {
    LstmLayer layer;
    const double bound = 1.0 / std::sqrt(static_cast<double>(h));
    layer.w.resize(4 * h, in);
    layer.u.resize(4 * h, h);
    fill(layer.w, bound);
    fill(layer.u, bound);
    layer.b = VectorXd::Zero(4 * h);
    layer.b.segment(h, h).setOnes();  // forget gate
    model.layers.push_back(std::move(layer));
    in = h;
  }
  model.dense_w.resize(config.input_dim, in);
  fill(model.dense_w, 1.0 / std::sqrt(static_cast<double>(in)));
  model.dense_b = VectorXd::Zero(config.input_dim);
  model.norm.mean.assign(config.input_dim, 0.0);
  model.norm.std.assign(config.input_dim, 1.0);
  return model;
}

std::size_t LstmModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.u.size() + l.b.size();
  return n + dense_w.size() + dense_b.size();
}

namespace {

template <typename Visit>
void for_each_block(LstmModel& model, Visit&& visit) {
  for (auto& l : model.layers) {
    visit(l.w.data(), l.w.size());
    visit(l.u.data(), l.u.size());
    visit(l.b.data(), l.b.size());
  }
  visit(model.dense_w.data(), model.dense_w.size());
  visit(model.dense_b.data(), model.dense_b.size());
}

}  // namespace

std::vector<double> LstmModel::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for_each_block(const_cast<LstmModel&>(*this), [&flat](const double* p, Eigen::Index n) {
    flat.insert(flat.end(), p, p + n);
  });
  return flat;
}

void LstmModel::set_parameters(const std::vector<double>& flat) {
  if (flat.size() != parameter_count()) throw ShapeMismatch("parameter vector has wrong size");
  std::size_t at = 0;
  for_each_block(*this, [&](double* p, Eigen::Index n) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), n, p);
    at += static_cast<std::size_t>(n);
  });
}

// ---------------------------------------------------------------------------
// Forward and backward passes

namespace {

// Vectorised through exp; tanh(x) = 2 sigmoid(2x) - 1.
template <typename Expr>
auto sigmoid(const Expr& x) {
  return (1.0 + (-x.array()).exp()).inverse();
}

template <typename Expr>
auto fast_tanh(const Expr& x) {
  return 2.0 * (1.0 + (-2.0 * x.array()).exp()).inverse() - 1.0;
}

// Activations of one layer over the whole window; column block t holds the
// batch at time step t.
struct LayerTape {
  MatrixXd x;  // input, in x (T*B)
  MatrixXd i, f, g, o, c, tc, h;  // H x (T*B)
};

MatrixXd stack_inputs(const WindowBatch& batch) {
  const auto steps = static_cast<Eigen::Index>(batch.inputs.size());
  const Eigen::Index rows = batch.inputs.front().rows();
  const Eigen::Index cols = batch.inputs.front().cols();
  MatrixXd x(rows, steps * cols);
  for (Eigen::Index t = 0; t < steps; ++t) x.middleCols(t * cols, cols) = batch.inputs[t];
  return x;
}

// Runs one layer. With `tape`, every activation is recorded for BPTT.
MatrixXd run_layer(const LstmLayer& layer, const MatrixXd& x, Eigen::Index batch,
                   LayerTape* tape) {
  const Eigen::Index hdim = layer.hidden();
  const Eigen::Index steps = x.cols() / batch;
  MatrixXd pre = layer.w * x;
  pre.colwise() += layer.b;

  MatrixXd h = MatrixXd::Zero(hdim, batch);
  MatrixXd c = MatrixXd::Zero(hdim, batch);
  MatrixXd hs(hdim, steps * batch);
  if (tape != nullptr) {
    for (MatrixXd* m : {&tape->i, &tape->f, &tape->g, &tape->o, &tape->c, &tape->tc})
      m->resize(hdim, steps * batch);
  }
  MatrixXd z(4 * hdim, batch);
  MatrixXd tc(hdim, batch);
  for (Eigen::Index t = 0; t < steps; ++t) {
    z.noalias() = pre.middleCols(t * batch, batch);
    z.noalias() += layer.u * h;
    z.topRows(hdim) = sigmoid(z.topRows(hdim)).matrix();
    z.middleRows(hdim, hdim) = sigmoid(z.middleRows(hdim, hdim)).matrix();
    z.middleRows(2 * hdim, hdim) = fast_tanh(z.middleRows(2 * hdim, hdim)).matrix();
    z.bottomRows(hdim) = sigmoid(z.bottomRows(hdim)).matrix();
    const auto ig = z.topRows(hdim);
    const auto fg = z.middleRows(hdim, hdim);
    const auto gg = z.middleRows(2 * hdim, hdim);
    const auto og = z.bottomRows(hdim);
    c = (fg.array() * c.array() + ig.array() * gg.array()).matrix();
    tc = fast_tanh(c).matrix();
    h = (og.array() * tc.array()).matrix();
    hs.middleCols(t * batch, batch) = h;
    if (tape != nullptr) {
      tape->i.middleCols(t * batch, batch) = ig;
      tape->f.middleCols(t * batch, batch) = fg;
      tape->g.middleCols(t * batch, batch) = gg;
      tape->o.middleCols(t * batch, batch) = og;
      tape->c.middleCols(t * batch, batch) = c;
      tape->tc.middleCols(t * batch, batch) = tc;
    }
  }
  return hs;
}

void check_batch(const LstmModel& model, const WindowBatch& batch) {
  if (batch.inputs.empty()) throw ShapeMismatch("empty window batch");
  if (batch.inputs.front().rows() != model.config.input_dim)
    throw ShapeMismatch("batch has " + std::to_string(batch.inputs.front().rows()) +
                        " channels, model expects " + std::to_string(model.config.input_dim));
}

}  // namespace

MatrixXd forward(const LstmModel& model, const WindowBatch& batch) {
  check_batch(model, batch);
  const Eigen::Index b = batch.inputs.front().cols();
  MatrixXd x = stack_inputs(batch);
  for (const auto& layer : model.layers) x = run_layer(layer, x, b, nullptr);
  MatrixXd y = model.dense_w * x.rightCols(b);
  y.colwise() += model.dense_b;
  return y;
}

double loss_and_gradient(const LstmModel& model, const WindowBatch& batch,
                         std::vector<double>& gradient) {
  check_batch(model, batch);
  const Eigen::Index b = batch.inputs.front().cols();
  const auto steps = static_cast<Eigen::Index>(batch.inputs.size());
  const std::size_t depth = model.layers.size();

  std::vector<LayerTape> tapes(depth);
  MatrixXd x = stack_inputs(batch);
  for (std::size_t l = 0; l < depth; ++l) {
    tapes[l].x = std::move(x);
    tapes[l].h = run_layer(model.layers[l], tapes[l].x, b, &tapes[l]);
    x = tapes[l].h;
  }
  const MatrixXd last = tapes.back().h.rightCols(b);
  MatrixXd y = model.dense_w * last;
  y.colwise() += model.dense_b;

  const MatrixXd diff = y - batch.targets;
  const double scale = 1.0 / static_cast<double>(diff.size());
  const double loss = diff.squaredNorm() * scale;
  const MatrixXd dy = 2.0 * scale * diff;

  std::vector<MatrixXd> dw(depth), du(depth);
  std::vector<VectorXd> db(depth);
  const MatrixXd dense_dw = dy * last.transpose();
  const VectorXd dense_db = dy.rowwise().sum();

  // Gradient w.r.t. each time step's hidden output of the current layer.
  MatrixXd dh_in = MatrixXd::Zero(last.rows(), steps * b);
  dh_in.rightCols(b) = model.dense_w.transpose() * dy;

  for (std::size_t l = depth; l-- > 0;) {
    const LstmLayer& layer = model.layers[l];
    const LayerTape& tp = tapes[l];
    const Eigen::Index hdim = layer.hidden();
    MatrixXd dz_all(4 * hdim, steps * b);
    MatrixXd dh_next = MatrixXd::Zero(hdim, b);
    MatrixXd dc_next = MatrixXd::Zero(hdim, b);
    for (Eigen::Index t = steps; t-- > 0;) {
      const auto cols = [&](const MatrixXd& m) { return m.middleCols(t * b, b); };
      const MatrixXd dh = cols(dh_in) + dh_next;
      const auto tc = cols(tp.tc).array();
      const auto ig = cols(tp.i).array();
      const auto fg = cols(tp.f).array();
      const auto gg = cols(tp.g).array();
      const auto og = cols(tp.o).array();
      const MatrixXd dc = (dc_next.array() + dh.array() * og * (1.0 - tc * tc)).matrix();
      const MatrixXd c_prev = t > 0 ? MatrixXd(tp.c.middleCols((t - 1) * b, b))
                                    : MatrixXd::Zero(hdim, b);
      auto dz = dz_all.middleCols(t * b, b);
      dz.topRows(hdim) = (dc.array() * gg * ig * (1.0 - ig)).matrix();
      dz.middleRows(hdim, hdim) = (dc.array() * c_prev.array() * fg * (1.0 - fg)).matrix();
      dz.middleRows(2 * hdim, hdim) = (dc.array() * ig * (1.0 - gg * gg)).matrix();
      dz.bottomRows(hdim) = (dh.array() * tc * og * (1.0 - og)).matrix();
      dh_next.noalias() = layer.u.transpose() * dz;
      dc_next = (dc.array() * fg).matrix();
    }
    dw[l].noalias() = dz_all * tp.x.transpose();
    // h_{t-1} for every step: zeros, then the hidden outputs shifted by one.
    MatrixXd h_prev = MatrixXd::Zero(hdim, steps * b);
    if (steps > 1) h_prev.rightCols((steps - 1) * b) = tp.h.leftCols((steps - 1) * b);
    du[l].noalias() = dz_all * h_prev.transpose();
    db[l] = dz_all.rowwise().sum();
    if (l > 0) dh_in.noalias() = layer.w.transpose() * dz_all;
  }

  gradient.clear();
  gradient.reserve(model.parameter_count());
  auto append = [&gradient](const auto& m) {
    gradient.insert(gradient.end(), m.data(), m.data() + m.size());
  };
  for (std::size_t l = 0; l < depth; ++l) {
    append(dw[l]);
    append(du[l]);
    append(db[l]);
  }
  append(dense_dw);
  append(dense_db);
  return loss;
}

// ---------------------------------------------------------------------------
// Training

namespace {

WindowBatch make_batch(const Channels& z, std::span<const std::size_t> starts, int input_len) {
  const auto dim = static_cast<Eigen::Index>(z.size());
  const auto b = static_cast<Eigen::Index>(starts.size());
  WindowBatch batch;
  batch.inputs.assign(input_len, MatrixXd(dim, b));
  batch.targets.resize(dim, b);
  for (Eigen::Index k = 0; k < b; ++k) {
    const std::size_t s = starts[k];
    for (Eigen::Index c = 0; c < dim; ++c) {
      for (int t = 0; t < input_len; ++t) batch.inputs[t](c, k) = z[c][s + t];
      batch.targets(c, k) = z[c][s + input_len];
    }
  }
  return batch;
}

std::size_t series_length(const Channels& channels) {
  if (channels.empty()) throw ShapeMismatch("no input channels");
  const std::size_t n = channels.front().size();
  for (const auto& c : channels)
    if (c.size() != n) throw ShapeMismatch("channels differ in length");
  return n;
}

struct AdamState {
  std::vector<double> m, v;
  long step = 0;
};

}  // namespace

LstmModel train(const LstmConfig& config, const Channels& normal_channels) {
  config.validate();
  if (static_cast<int>(normal_channels.size()) != config.input_dim)
    throw ShapeMismatch("training data has " + std::to_string(normal_channels.size()) +
                        " channels, config expects " + std::to_string(config.input_dim));
  const std::size_t n = series_length(normal_channels);
  const auto len = static_cast<std::size_t>(config.input_len);
  if (n <= len + 1) throw ShapeMismatch("training series too short for input_len");

  LstmModel model = LstmModel::initialise(config);
  model.norm = Normalization::fit(normal_channels);
  const Channels z = model.norm.normalize(normal_channels);

  // One window per stride slot, at a fixed random offset inside the slot. A
  // regular grid would alias with the process cycle and never train on the
  // same cycle phases twice, e.g. on the pump switching frames.
  std::vector<std::size_t> starts;
  {
    const auto stride = static_cast<std::size_t>(config.window_stride);
    std::mt19937_64 placer(config.seed ^ 0x57a27ULL);
    for (std::size_t slot = 0; slot + len < n; slot += stride) {
      const std::size_t room = std::min(stride, n - len - slot);
      starts.push_back(slot + std::uniform_int_distribution<std::size_t>(0, room - 1)(placer));
    }
  }

  std::vector<double> params = model.parameters();
  std::vector<double> grad;
  AdamState adam{std::vector<double>(params.size(), 0.0),
                 std::vector<double>(params.size(), 0.0), 0};
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  std::mt19937_64 shuffler(config.seed ^ 0x5eed5eedULL);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.learning_rate * std::pow(config.lr_decay, static_cast<double>(epoch));
    std::shuffle(starts.begin(), starts.end(), shuffler);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t at = 0; at < starts.size(); at += config.batch_size) {
      const std::size_t count = std::min<std::size_t>(config.batch_size, starts.size() - at);
      const auto batch =
          make_batch(z, std::span<const std::size_t>(starts).subspan(at, count), config.input_len);
      const double loss = loss_and_gradient(model, batch, grad);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "training diverged: loss " << loss << " at epoch " << epoch + 1 << ", batch "
            << at / config.batch_size + 1 << " (learning rate " << config.learning_rate << ")";
        throw NonFiniteLoss(msg.str());
      }
      loss_sum += loss * static_cast<double>(count);
      seen += count;

      if (config.clip_norm > 0.0) {
        const double norm = std::sqrt(std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0));
        if (norm > config.clip_norm)
          for (double& g : grad) g *= config.clip_norm / norm;
      }
      if (config.optimizer == Optimizer::Adam) {
        ++adam.step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(adam.step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(adam.step));
        for (std::size_t p = 0; p < params.size(); ++p) {
          adam.m[p] = beta1 * adam.m[p] + (1.0 - beta1) * grad[p];
          adam.v[p] = beta2 * adam.v[p] + (1.0 - beta2) * grad[p] * grad[p];
          params[p] -= lr * (adam.m[p] / c1) / (std::sqrt(adam.v[p] / c2) + eps);
        }
      } else {
        for (std::size_t p = 0; p < params.size(); ++p) params[p] -= lr * grad[p];
      }
      model.set_parameters(params);
    }
    model.epoch_losses.push_back(loss_sum / static_cast<double>(seen));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Inference

PredictionRun predict_run(const LstmModel& model, const Channels& channels) {
  if (static_cast<int>(channels.size()) != model.config.input_dim)
    throw ShapeMismatch("trace has " + std::to_string(channels.size()) +
                        " channels, model was trained on " +
                        std::to_string(model.config.input_dim));
  const std::size_t n = series_length(channels);
  const auto len = static_cast<std::size_t>(model.config.input_len);
  if (n < len) throw ShapeMismatch("series shorter than input_len");

  PredictionRun run;
  run.valid_from = len;
  run.frames = n;
  run.predictions.assign(channels.size(), {});
  run.errors.assign(channels.size(), {});

  const Channels z = model.norm.normalize(channels);
  constexpr std::size_t kChunk = 256;
  std::vector<std::size_t> starts;
  for (std::size_t t = len; t < n; t += kChunk) {
    starts.clear();
    for (std::size_t s = t; s < std::min(n, t + kChunk); ++s) starts.push_back(s - len);
    const auto batch = make_batch(z, starts, model.config.input_len);
    const MatrixXd y = forward(model, batch);
    if (!y.allFinite()) throw NonFiniteLoss("non-finite prediction near frame " + std::to_string(t));
    for (std::size_t c = 0; c < channels.size(); ++c) {
      for (Eigen::Index k = 0; k < y.cols(); ++k) {
        const double pred = y(static_cast<Eigen::Index>(c), k);
        run.predictions[c].push_back(model.norm.denormalize(c, pred));
        run.errors[c].push_back(std::abs(pred - batch.targets(static_cast<Eigen::Index>(c), k)));
      }
    }
  }
  return run;
}

std::vector<double> lstm_score(const PredictionRun& run) {
  std::vector<double> score(run.frames, 0.0);
  if (run.errors.empty() || run.frames <= run.valid_from) return score;
  for (std::size_t t = run.valid_from; t < run.frames; ++t) {
    double s = 0.0;
    for (const auto& e : run.errors) s = std::max(s, e[t - run.valid_from]);
    score[t] = s;
  }
  std::fill(score.begin(), score.begin() + static_cast<std::ptrdiff_t>(run.valid_from),
            score[run.valid_from]);
  return score;
}

// ---------------------------------------------------------------------------
// Gradient check

WindowBatch random_batch(int input_len, int input_dim, int batch, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  WindowBatch out;
  out.inputs.assign(input_len, MatrixXd(input_dim, batch));
  for (auto& m : out.inputs)
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(engine);
  out.targets.resize(input_dim, batch);
  for (Eigen::Index k = 0; k < out.targets.size(); ++k) out.targets.data()[k] = normal(engine);
  return out;
}

GradientCheck gradient_check(const LstmConfig& config, const WindowBatch& sample) {
  constexpr double h = 1e-5;
  // Central differences at h = 1e-5 carry about eps * loss / h ~ 1e-11 of
  // round-off, so relative deviations are taken against at least 1e-6.
  constexpr double kFloor = 1e-6;

  LstmModel model = LstmModel::initialise(config);
  std::vector<double> analytic;
  loss_and_gradient(model, sample, analytic);

  std::vector<double> params = model.parameters();
  std::vector<double> scratch;
  GradientCheck result;
  result.parameters = params.size();
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    params[p] = saved + h;
    model.set_parameters(params);
    const double up = loss_and_gradient(model, sample, scratch);
    params[p] = saved - h;
    model.set_parameters(params);
    const double down = loss_and_gradient(model, sample, scratch);
    params[p] = saved;

    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[p]), std::abs(numeric), kFloor});
    result.max_relative_deviation =
        std::max(result.max_relative_deviation, std::abs(analytic[p] - numeric) / denom);
  }
  model.set_parameters(params);
  return result;
}

}  // namespace icsad
