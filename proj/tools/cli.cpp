#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "icsad/config_file.hpp"
#include "icsad/errors.hpp"
#include "icsad/pipeline.hpp"
#include "icsad/report.hpp"
#include "icsad/simulate.hpp"

namespace icsad::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string timestamp_dir() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << "run/" << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return s.str();
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

std::string joined(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) s += (s.empty() ? "" : " ") + a;
  return s;
}

// ---------------------------------------------------------------------------
// Option blocks

struct SimulateArgs {
  std::string config_file;
  std::vector<std::string> settings;
  double duration = 3600.0;
  std::string scenario = "none";
  int attacked_plc = 3;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct ScoringArgs {
  std::string threshold = "meanstd";
  std::optional<double> parameter;
  std::size_t min_duration = 4;
  std::optional<std::size_t> gap;
  std::optional<std::size_t> margin;
  std::string calibration;
};

struct DetectArgs {
  std::string run_dir;
  int plc = 0;
  std::string trace;
  std::string train;
  std::string method = "mp";
  std::optional<std::size_t> window;
  std::optional<std::size_t> exclusion;
  std::optional<double> std_eps;
  std::string channels = "flow,level1";
  bool include_valve = false;
  ScoringArgs scoring;
  std::string out;
  bool svg = false;
  std::uint64_t seed = 7;
  // LSTM
  std::string layers = "64,64,32";
  bool full_scale = false;
  int input_len = 300;
  double lr = 0.001;
  double lr_decay = 0.85;
  int epochs = 25;
  int batch = 32;
  int stride = 40;
  std::string optimizer = "adam";
  std::string model_out;
  std::string model_in;
};

struct AcfArgs {
  std::string run_dir;
  int plc = 1;
  std::string trace;
  std::string column = "flow";
  std::string out;
  std::uint64_t seed = 0;
};

struct EvalArgs {
  std::string plot;
  ScoringArgs scoring;
  std::size_t window = 300;
  std::string out;
  std::uint64_t seed = 0;
};

struct PlotArgs {
  std::string plot;
  std::string out;
  std::string title;
  std::uint64_t seed = 0;
};

void add_scoring_options(CLI::App* app, ScoringArgs& a) {
  app->add_option("--threshold", a.threshold, "meanstd | quantile | fixed")
      ->check(CLI::IsMember({"meanstd", "quantile", "fixed"}));
  app->add_option("--k,--threshold-param", a.parameter,
                  "k for meanstd (default 4), q for quantile (default 0.999), or the fixed cutoff");
  app->add_option("--min-duration", a.min_duration, "minimum flagged run length in frames")
      ->check(CLI::PositiveNumber);
  app->add_option("--gap", a.gap, "merge flagged runs closer than this many frames (default window/4)");
  app->add_option("--margin", a.margin, "transition margin in frames (default m for mp, 0 for lstm)");
  app->add_option("--calibration", a.calibration, "attack-free calibration span BEGIN:END in frames");
}

ScoringOptions scoring_from(const ScoringArgs& a) {
  ScoringOptions s;
  if (a.threshold == "quantile") {
    s.method = ThresholdMethod::Quantile;
    s.parameter = a.parameter.value_or(0.999);
  } else if (a.threshold == "fixed") {
    s.method = ThresholdMethod::Fixed;
    if (!a.parameter) throw ConfigError("--threshold fixed requires --k VALUE");
    s.parameter = *a.parameter;
  } else {
    s.parameter = a.parameter.value_or(4.0);
  }
  s.min_duration_frames = a.min_duration;
  s.gap_merge_frames = a.gap;
  s.margin_frames = a.margin;
  if (!a.calibration.empty()) {
    const auto colon = a.calibration.find(':');
    if (colon == std::string::npos) throw ConfigError("--calibration expects BEGIN:END");
    try {
      s.calibration = FrameRange{std::stoul(a.calibration.substr(0, colon)),
                                 std::stoul(a.calibration.substr(colon + 1))};
    } catch (const std::exception&) {
      throw ConfigError("--calibration expects BEGIN:END");
    }
  }
  return s;
}

std::vector<int> parse_layers(const std::string& text) {
  std::vector<int> sizes;
  for (const auto& item : ChannelSelection::parse(text).names) {
    try {
      sizes.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("--layers expects comma-separated integers");
    }
  }
  return sizes;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const auto start = Clock::now();
  PlantConfig config;
  if (!a.config_file.empty()) config = plant_config_from(read_settings(a.config_file), config);
  for (const auto& kv : a.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed) config.rng_seed = *a.seed;
  config.validate();
  out << "seed: " << config.rng_seed << '\n';

  std::optional<AttackScript> script;
  if (a.scenario == "canonical") script = canonical_scenario();

  const auto traces =
      generate_fleet(config, script ? &*script : nullptr, a.attacked_plc, a.duration);
  const double sim_seconds = seconds_since(start);

  const fs::path dir = a.out.empty() ? fs::path(timestamp_dir()) : fs::path(a.out);
  fs::create_directories(dir);
  const auto write_start = Clock::now();
  ordered_json outputs = ordered_json::array();
  ordered_json seeds = ordered_json::object();
  for (const auto& t : traces) {
    const std::string name = "plc" + std::to_string(t.plc_id) + ".csv";
    save(t, dir / name);
    outputs.push_back(name);
    seeds[name] = t.manifest.seed;
  }

  // Append run provenance to the manifest written by save().
  nlohmann::json manifest;
  {
    std::ifstream in(dir / "manifest.json");
    manifest = nlohmann::json::parse(in);
  }
  manifest["run"] = {{"tool", "icsad"},
                     {"tool_version", ICSAD_VERSION},
                     {"command", argv},
                     {"config", config},
                     {"duration_s", a.duration},
                     {"scenario", a.scenario},
                     {"attacked_plc", script ? nlohmann::json(a.attacked_plc) : nlohmann::json(nullptr)},
                     {"seeds", seeds},
                     {"outputs", outputs},
                     {"stage_seconds",
                      {{"simulate", sim_seconds}, {"write", seconds_since(write_start)}}}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  out << "wrote " << traces.size() << " traces (" << traces.front().size() << " frames each) to "
      << dir.string() << '\n';
  if (script) out << "attacked PLC: " << a.attacked_plc << " (canonical scenario)\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// detect

fs::path resolve_trace(const std::string& run_dir, int plc, const std::string& trace) {
  if (!trace.empty()) return trace;
  if (run_dir.empty()) throw ConfigError("pass --trace FILE or --run DIR");
  if (plc > 0) return fs::path(run_dir) / ("plc" + std::to_string(plc) + ".csv");
  // Default to the attacked instance recorded in the run manifest.
  const fs::path manifest_path = fs::path(run_dir) / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw IoFailure("cannot open " + manifest_path.string());
  const auto manifest = nlohmann::json::parse(in, nullptr, false);
  int chosen = 1;
  if (manifest.is_object() && manifest.contains("run") && manifest["run"].contains("attacked_plc") &&
      manifest["run"]["attacked_plc"].is_number_integer())
    chosen = manifest["run"]["attacked_plc"].get<int>();
  return fs::path(run_dir) / ("plc" + std::to_string(chosen) + ".csv");
}

fs::path default_train_trace(const fs::path& test_path, const Trace& test) {
  const fs::path dir = test_path.parent_path();
  for (int k = 1; k <= kFleetSize; ++k) {
    if (k == test.plc_id) continue;
    const fs::path p = dir / ("plc" + std::to_string(k) + ".csv");
    if (fs::exists(p)) return p;
  }
  throw ConfigError("no attack-free training trace found; pass --train FILE");
}

void emit(const std::string& stem, const DetectionReport& report, const PlotData& plot,
          const fs::path& dir, bool svg, std::ostream& out) {
  write_json(dir / ("report_" + stem + ".json"), to_json(report));
  const std::string table = format_table(report);
  write_text(dir / ("report_" + stem + ".txt"), table);
  write_plot_csv(plot, dir / ("plot_" + stem + ".csv"));
  if (svg) write_text(dir / ("plot_" + stem + ".svg"), render_svg(plot, report.detector));
  out << table;
}

int cmd_detect(const DetectArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  out << "seed: " << a.seed << '\n';
  const fs::path test_path = resolve_trace(a.run_dir, a.plc, a.trace);
  const Trace test = load(test_path);
  const fs::path dir = a.out.empty() ? test_path.parent_path() / "detect" : fs::path(a.out);
  fs::create_directories(dir);

  ChannelSelection channels = ChannelSelection::parse(a.channels);
  if (a.include_valve) channels.names.emplace_back("valve_reported");
  for (const auto& name : channels.names) column(test, name);  // fail fast on unknown names
  const ScoringOptions scoring = scoring_from(a.scoring);

  ordered_json stages = ordered_json::object();
  ordered_json run_info;
  run_info["tool"] = "icsad";
  run_info["tool_version"] = ICSAD_VERSION;
  run_info["command"] = argv;
  run_info["seed"] = a.seed;
  run_info["test_trace"] = test_path.string();

  if (a.method == "mp" || a.method == "both") {
    const auto start = Clock::now();
    MpOptions opts;
    opts.channels = channels;
    opts.window = a.window;
    opts.exclusion_radius = a.exclusion;
    opts.std_epsilon = a.std_eps;
    opts.scoring = scoring;
    const auto result = detect_mp(test, opts);
    out << "window: " << result.window
        << (result.window_from_acf ? " (autocorrelation)" : " (fixed)") << '\n';
    emit("mp", result.report, result.plot, dir, a.svg, out);
    stages["mp"] = seconds_since(start);
    run_info["window"] = result.window;
  }

  if (a.method == "lstm" || a.method == "both") {
    const auto start = Clock::now();
    LstmOptions opts;
    opts.channels = channels;
    opts.scoring = scoring;
    LstmConfig& cfg = opts.config;
    if (a.full_scale) cfg = LstmConfig::full_scale();
    else cfg.layer_sizes = parse_layers(a.layers);
    cfg.input_len = a.input_len;
    cfg.learning_rate = a.lr;
    cfg.lr_decay = a.lr_decay;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch;
    cfg.window_stride = a.stride;
    cfg.optimizer = a.optimizer == "sgd" ? Optimizer::Sgd : Optimizer::Adam;
    cfg.seed = a.seed;
    cfg.input_dim = static_cast<int>(channels.names.size());

    std::optional<LstmModel> pretrained;
    Trace train_trace;
    if (!a.model_in.empty()) {
      pretrained = load_model(a.model_in);
      run_info["model_in"] = a.model_in;
    } else {
      const fs::path train_path = a.train.empty() ? default_train_trace(test_path, test) : fs::path(a.train);
      train_trace = load(train_path);
      run_info["train_trace"] = train_path.string();
      out << "training on " << train_path.string() << '\n';
    }
    const auto result = detect_lstm(train_trace, test, opts, pretrained ? &*pretrained : nullptr);
    if (!result.model.epoch_losses.empty())
      out << "epoch loss: first " << result.model.epoch_losses.front() << ", last "
          << result.model.epoch_losses.back() << '\n';
    if (!a.model_out.empty()) save_model(result.model, a.model_out);
    emit("lstm", result.report, result.plot, dir, a.svg, out);
    stages["lstm"] = seconds_since(start);
  }

  run_info["stage_seconds"] = stages;
  write_json(dir / "detect_manifest.json", run_info);
  return kOk;
}

// ---------------------------------------------------------------------------
// acf / eval / plot

int cmd_acf(const AcfArgs& a, std::ostream& out) {
  out << "seed: " << a.seed << '\n';
  const fs::path path = resolve_trace(a.run_dir, a.plc, a.trace);
  const Trace trace = load(path);
  const auto series = column(trace, a.column);
  const auto est = estimate_period(series, trace.sample_rate_hz);

  const fs::path csv = a.out.empty() ? path.parent_path() / ("acf_" + a.column + ".csv") : fs::path(a.out);
  std::ostringstream data;
  data << "lag,seconds,acf\n" << std::setprecision(17);
  for (std::size_t k = 0; k < est.acf.size(); ++k)
    data << k << ',' << static_cast<double>(k) / trace.sample_rate_hz << ',' << est.acf[k] << '\n';
  write_text(csv, data.str());

  out << std::fixed << std::setprecision(3) << "period: " << est.period_s << " s ("
      << est.lag_samples << " samples), acf peak " << est.peak_value << '\n'
      << "window: " << choose_window(series, trace.sample_rate_hz) << '\n';
  return kOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  out << "seed: " << a.seed << '\n';
  const PlotData plot = read_plot_csv(a.plot);
  const ScoringOptions s = scoring_from(a.scoring);
  Threshold threshold{s.method, s.parameter, {}};
  threshold.calibration_span =
      s.calibration.value_or(calibration_span_from_labels(plot.labels, a.window));
  const double cutoff =
      calibrate(plot.score, threshold, s.method == ThresholdMethod::Fixed ? 0 : 10 * a.window);
  const auto flagged =
      flag(plot.score, cutoff, FlagParams{s.min_duration_frames, s.gap_merge_frames.value_or(a.window / 4)});
  DetectionReport report = evaluate(flagged, plot.labels, s.margin_frames.value_or(a.window));
  report.detector = "eval";
  report.cutoff = cutoff;
  report.parameters = {{"window", static_cast<double>(a.window)},
                       {"threshold_parameter", s.parameter},
                       {"min_duration_frames", static_cast<double>(s.min_duration_frames)}};
  const fs::path dest = a.out.empty() ? fs::path(a.plot).replace_extension(".report.json") : fs::path(a.out);
  write_json(dest, to_json(report));
  out << format_table(report);
  return kOk;
}

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  out << "seed: " << a.seed << '\n';
  const PlotData plot = read_plot_csv(a.plot);
  const fs::path dest = a.out.empty() ? fs::path(a.plot).replace_extension(".svg") : fs::path(a.out);
  write_text(dest, render_svg(plot, a.title.empty() ? fs::path(a.plot).stem().string() : a.title));
  out << "wrote " << dest.string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate a two-container water process fleet, inject valve attacks and "
               "detect them with matrix profiles or an LSTM predictor"};
  app.name("icsad");
  app.set_version_flag("--version", std::string(ICSAD_VERSION));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "simulate the five-PLC fleet and write a run directory");
  s->add_option("--config", sim.config_file, "plant key = value configuration file");
  s->add_option("--set", sim.settings, "override one plant setting, KEY=VALUE");
  s->add_option("--duration", sim.duration, "seconds to simulate")->check(CLI::PositiveNumber);
  s->add_option("--scenario", sim.scenario, "none | canonical")
      ->check(CLI::IsMember({"none", "canonical"}));
  s->add_option("--attacked-plc", sim.attacked_plc, "instance receiving the attack script")
      ->check(CLI::Range(1, kFleetSize));
  s->add_option("--seed", sim.seed, "base noise seed");
  s->add_option("--out", sim.out, "run directory (default run/<timestamp>)");

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "score a trace and evaluate against its labels");
  d->add_option("--run", det.run_dir, "run directory written by simulate");
  d->add_option("--plc", det.plc, "instance to test (default: the attacked one)")
      ->check(CLI::Range(1, kFleetSize));
  d->add_option("--trace,--test", det.trace, "trace CSV to test");
  d->add_option("--train", det.train, "attack-free trace CSV for LSTM training");
  d->add_option("--method", det.method, "mp | lstm | both")
      ->check(CLI::IsMember({"mp", "lstm", "both"}));
  d->add_option("--window", det.window, "matrix profile window m (default: from autocorrelation)");
  d->add_option("--exclusion", det.exclusion, "exclusion radius (default ceil(m/2))");
  d->add_option("--std-eps", det.std_eps, "minimum window standard deviation");
  d->add_option("--channels", det.channels, "comma-separated detector inputs");
  d->add_flag("--include-valve", det.include_valve, "also feed the reported valve state");
  add_scoring_options(d, det.scoring);
  d->add_option("--out", det.out, "output directory (default <trace dir>/detect)");
  d->add_flag("--svg", det.svg, "also write SVG charts");
  d->add_option("--seed", det.seed, "LSTM initialisation and shuffling seed");
  d->add_option("--layers", det.layers, "LSTM widths, comma-separated");
  d->add_flag("--full-scale", det.full_scale, "use 350,350,250 LSTM layers");
  d->add_option("--input-len", det.input_len, "LSTM input window")->check(CLI::PositiveNumber);
  d->add_option("--lr", det.lr, "learning rate")->check(CLI::PositiveNumber);
  d->add_option("--lr-decay", det.lr_decay, "learning rate multiplier per epoch (1 disables)")
      ->check(CLI::Range(0.0, 1.0));
  d->add_option("--epochs", det.epochs, "training epochs")->check(CLI::PositiveNumber);
  d->add_option("--batch", det.batch, "windows per update")->check(CLI::PositiveNumber);
  d->add_option("--stride", det.stride, "frames between training windows")->check(CLI::PositiveNumber);
  d->add_option("--optimizer", det.optimizer, "adam | sgd")->check(CLI::IsMember({"adam", "sgd"}));
  d->add_option("--model-out", det.model_out, "write the trained model (JSON)");
  d->add_option("--model-in", det.model_in, "score with a saved model instead of training");

  AcfArgs acf;
  auto* c = app.add_subcommand("acf", "estimate the process period from the autocorrelation");
  c->add_option("--run", acf.run_dir, "run directory");
  c->add_option("--plc", acf.plc, "instance")->check(CLI::Range(1, kFleetSize));
  c->add_option("--trace", acf.trace, "trace CSV");
  c->add_option("--column", acf.column, "channel to analyse");
  c->add_option("--out", acf.out, "ACF curve CSV (default acf_<column>.csv next to the trace)");
  c->add_option("--seed", acf.seed, "accepted for uniformity; the estimate is deterministic");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "re-threshold a plot-data CSV and evaluate it");
  e->add_option("--plot", ev.plot, "plot CSV written by detect")->required();
  add_scoring_options(e, ev.scoring);
  e->add_option("--window", ev.window, "window length used for defaults")->check(CLI::PositiveNumber);
  e->add_option("--out", ev.out, "report JSON path");
  e->add_option("--seed", ev.seed, "accepted for uniformity");

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "render a plot-data CSV as SVG");
  p->add_option("--plot", pl.plot, "plot CSV written by detect")->required();
  p->add_option("--out", pl.out, "SVG path");
  p->add_option("--title", pl.title, "chart title");
  p->add_option("--seed", pl.seed, "accepted for uniformity");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return cmd_simulate(sim, args, out);
    if (*d) return cmd_detect(det, args, out);
    if (*c) return cmd_acf(acf, out);
    if (*e) return cmd_eval(ev, out);
    if (*p) return cmd_plot(pl, out);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    switch (ex.kind()) {
      case ErrorKind::Usage: return kUsage;
      case ErrorKind::Data: return kDataError;
      case ErrorKind::Detector: return kDetectorFailure;
    }
  } catch (const nlohmann::json::exception& ex) {
    err << "error: malformed JSON: " << ex.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace icsad::cli
