#pragma once

#include <optional>
#include <vector>

#include "icsad/detect_eval.hpp"
#include "icsad/lstm.hpp"
#include "icsad/matrix_profile.hpp"
#include "icsad/report.hpp"
#include "icsad/trace.hpp"

namespace icsad {

// Threshold and interval settings shared by both detectors. Unset values
// take detector-specific defaults derived from the window length.
struct ScoringOptions {
  ThresholdMethod method = ThresholdMethod::MeanPlusKStd;
  double parameter = 4.0;
  std::size_t min_duration_frames = 4;
  std::optional<std::size_t> gap_merge_frames;  // default window / 4
  std::optional<std::size_t> margin_frames;     // MP: m, LSTM: 0
  std::optional<FrameRange> calibration;        // default: attack-free prefix
};

struct MpOptions {
  ChannelSelection channels;
  std::optional<std::size_t> window;  // chosen by autocorrelation when unset
  std::optional<std::size_t> exclusion_radius;
  std::optional<double> std_epsilon;  // default 1e-8 of each channel's range
  ScoringOptions scoring;
};

struct MpDetection {
  std::size_t window = 0;
  bool window_from_acf = false;
  std::vector<MatrixProfile> profiles;
  std::vector<double> score;
  DetectionReport report;
  PlotData plot;
};

MpDetection detect_mp(const Trace& trace, const MpOptions& options);

struct LstmOptions {
  ChannelSelection channels;
  LstmConfig config;
  ScoringOptions scoring;
};

struct LstmDetection {
  LstmModel model;
  PredictionRun run;
  std::vector<double> score;
  DetectionReport report;
  PlotData plot;
};

// Trains on `train` (which must be attack-free) unless `model` is given, then
// scores `test`.
LstmDetection detect_lstm(const Trace& train, const Trace& test, const LstmOptions& options,
                          const LstmModel* model = nullptr);

}  // namespace icsad
