#include "icsad/pipeline.hpp"

#include <algorithm>

#include "icsad/errors.hpp"

namespace icsad {

namespace {

DetectionReport score_and_evaluate(const std::vector<double>& score, const Trace& trace,
                                   const ScoringOptions& opts, std::size_t window,
                                   std::size_t default_margin, std::size_t skip_frames) {
  const std::size_t margin = opts.margin_frames.value_or(default_margin);
  const std::size_t gap = opts.gap_merge_frames.value_or(window / 4);

  Threshold threshold{opts.method, opts.parameter, {}};
  threshold.calibration_span =
      opts.calibration.value_or(calibration_span_from_labels(trace.labels, window, skip_frames));
  for (std::size_t i = threshold.calibration_span.begin;
       i < std::min(threshold.calibration_span.end, trace.labels.size()); ++i)
    if (trace.labels[i] != Label::Normal)
      throw InsufficientCalibration("calibration span contains attack frames");
  const double cutoff = calibrate(score, threshold,
                                  opts.method == ThresholdMethod::Fixed ? 0 : 10 * window);

  const auto flagged = flag(score, cutoff, FlagParams{opts.min_duration_frames, gap});
  DetectionReport report = evaluate(flagged, trace.labels, margin);
  report.cutoff = cutoff;
  report.parameters = {
      {"window", static_cast<double>(window)},
      {"threshold_method", static_cast<double>(static_cast<int>(opts.method))},
      {"threshold_parameter", opts.parameter},
      {"min_duration_frames", static_cast<double>(opts.min_duration_frames)},
      {"gap_merge_frames", static_cast<double>(gap)},
      {"calibration_begin", static_cast<double>(threshold.calibration_span.begin)},
      {"calibration_end", static_cast<double>(threshold.calibration_span.end)},
  };
  return report;
}

}  // namespace

MpDetection detect_mp(const Trace& trace, const MpOptions& options) {
  trace.validate();
  const Channels channels = select(trace, options.channels);
  if (channels.empty()) throw ConfigError("no channels selected");

  MpDetection out;
  if (options.window) {
    out.window = *options.window;
  } else {
    out.window = choose_window(channels.front(), trace.sample_rate_hz);
    out.window_from_acf = true;
  }
  for (const auto& series : channels) {
    MpConfig cfg = MpConfig::for_window(out.window);
    if (options.exclusion_radius) cfg.exclusion_radius = *options.exclusion_radius;
    cfg.std_epsilon = options.std_epsilon.value_or(default_std_epsilon(series));
    out.profiles.push_back(mp_fast(series, cfg));
  }
  out.score = mp_score(out.profiles);

  out.report = score_and_evaluate(out.score, trace, options.scoring, out.window, out.window, 0);
  out.report.detector = "matrix-profile";
  out.report.channels = options.channels.names;
  out.report.parameters.emplace_back("exclusion_radius",
                                     static_cast<double>(out.profiles.front().config.exclusion_radius));

  const std::size_t n = trace.size();
  for (std::size_t c = 0; c < channels.size(); ++c) {
    out.plot.series.emplace_back(options.channels.names[c], channels[c]);
    // Profile values are indexed by window start; pad to the frame count.
    std::vector<double> padded = out.profiles[c].distances;
    padded.resize(n, padded.back());
    out.plot.series.emplace_back("mp_" + options.channels.names[c], std::move(padded));
  }
  out.plot.score = out.score;
  out.plot.cutoff = out.report.cutoff;
  out.plot.labels = trace.labels;
  return out;
}

LstmDetection detect_lstm(const Trace& train, const Trace& test, const LstmOptions& options,
                          const LstmModel* model) {
  test.validate();
  LstmDetection out;
  if (model != nullptr) {
    out.model = *model;
  } else {
    if (std::any_of(train.labels.begin(), train.labels.end(),
                    [](Label l) { return l != Label::Normal; }))
      throw ConfigError("LSTM training trace must be attack-free");
    train.validate();
    LstmConfig cfg = options.config;
    cfg.input_dim = static_cast<int>(options.channels.names.size());
    out.model = icsad::train(cfg, select(train, options.channels));
  }

  const Channels channels = select(test, options.channels);
  out.run = predict_run(out.model, channels);
  out.score = lstm_score(out.run);
  const auto len = static_cast<std::size_t>(out.model.config.input_len);
  out.report = score_and_evaluate(out.score, test, options.scoring, len, 0, len);
  out.report.detector = "lstm";
  out.report.channels = options.channels.names;

  const std::size_t n = test.size();
  for (std::size_t c = 0; c < channels.size(); ++c) {
    out.plot.series.emplace_back(options.channels.names[c], channels[c]);
    std::vector<double> pred(n, out.run.predictions[c].empty() ? 0.0 : out.run.predictions[c][0]);
    std::copy(out.run.predictions[c].begin(), out.run.predictions[c].end(),
              pred.begin() + static_cast<std::ptrdiff_t>(out.run.valid_from));
    out.plot.series.emplace_back("pred_" + options.channels.names[c], std::move(pred));
  }
  out.plot.score = out.score;
  out.plot.cutoff = out.report.cutoff;
  out.plot.labels = test.labels;
  return out;
}

}  // namespace icsad
