#include <fstream>

#include <nlohmann/json.hpp>

#include "icsad/errors.hpp"
#include "icsad/lstm.hpp"

namespace icsad {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  return json{{"rows", m.rows()},
              {"cols", m.cols()},
              {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw SchemaMismatch("matrix payload does not match its shape");
  return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

}  // namespace

void save_model(const LstmModel& model, const std::filesystem::path& path) {
  const auto& c = model.config;
  json j;
  j["format"] = "icsad-lstm";
  j["version"] = 1;
  j["config"] = {{"layer_sizes", c.layer_sizes},
                 {"input_len", c.input_len},
                 {"input_dim", c.input_dim},
                 {"learning_rate", c.learning_rate},
                 {"epochs", c.epochs},
                 {"batch_size", c.batch_size},
                 {"window_stride", c.window_stride},
                 {"clip_norm", c.clip_norm},
                 {"lr_decay", c.lr_decay},
                 {"optimizer", c.optimizer == Optimizer::Adam ? "adam" : "sgd"},
                 {"seed", c.seed}};
  j["normalization"] = {{"mean", model.norm.mean}, {"std", model.norm.std}};
  j["epoch_losses"] = model.epoch_losses;
  json layers = json::array();
  for (const auto& l : model.layers)
    layers.push_back({{"w", matrix_json(l.w)}, {"u", matrix_json(l.u)}, {"b", matrix_json(l.b)}});
  j["layers"] = std::move(layers);
  j["dense"] = {{"w", matrix_json(model.dense_w)}, {"b", matrix_json(model.dense_b)}};

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot write model file " + path.string());
  out << j.dump() << '\n';
}

LstmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open model file " + path.string());
  try {
    const json j = json::parse(in);
    if (j.at("format") != "icsad-lstm") throw SchemaMismatch("not an LSTM model file");
    LstmModel model;
    auto& c = model.config;
    const auto& jc = j.at("config");
    c.layer_sizes = jc.at("layer_sizes").get<std::vector<int>>();
    c.input_len = jc.at("input_len").get<int>();
    c.input_dim = jc.at("input_dim").get<int>();
    c.learning_rate = jc.at("learning_rate").get<double>();
    c.epochs = jc.at("epochs").get<int>();
    c.batch_size = jc.at("batch_size").get<int>();
    c.window_stride = jc.at("window_stride").get<int>();
    c.clip_norm = jc.at("clip_norm").get<double>();
    c.lr_decay = jc.at("lr_decay").get<double>();
    c.optimizer = jc.at("optimizer") == "sgd" ? Optimizer::Sgd : Optimizer::Adam;
    c.seed = jc.at("seed").get<std::uint64_t>();
    c.validate();
    model.norm.mean = j.at("normalization").at("mean").get<std::vector<double>>();
    model.norm.std = j.at("normalization").at("std").get<std::vector<double>>();
    model.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();

    int in_dim = c.input_dim;
    const auto& layers = j.at("layers");
    if (layers.size() != c.layer_sizes.size()) throw SchemaMismatch("layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      LstmLayer layer{matrix_from(layers[l].at("w")), matrix_from(layers[l].at("u")),
                      matrix_from(layers[l].at("b"))};
      const int h = c.layer_sizes[l];
      if (layer.w.rows() != 4 * h || layer.w.cols() != in_dim || layer.u.rows() != 4 * h ||
          layer.u.cols() != h || layer.b.size() != 4 * h)
        throw SchemaMismatch("layer " + std::to_string(l) + " has inconsistent shapes");
      model.layers.push_back(std::move(layer));
      in_dim = h;
    }
    model.dense_w = matrix_from(j.at("dense").at("w"));
    model.dense_b = matrix_from(j.at("dense").at("b"));
    if (model.dense_w.rows() != c.input_dim || model.dense_w.cols() != in_dim ||
        model.dense_b.size() != c.input_dim)
      throw SchemaMismatch("dense head has inconsistent shapes");
    if (model.norm.mean.size() != static_cast<std::size_t>(c.input_dim) ||
        model.norm.std.size() != static_cast<std::size_t>(c.input_dim))
      throw SchemaMismatch("normalisation statistics do not match input_dim");
    for (double s : model.norm.std)
      if (!(s > 0.0)) throw SchemaMismatch("normalisation std must be positive");
    return model;
  } catch (const json::exception& e) {
    throw SchemaMismatch(path.string() + ": " + e.what());
  }
}

}  // namespace icsad
