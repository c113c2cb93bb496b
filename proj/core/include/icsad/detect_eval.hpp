#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "icsad/trace.hpp"

namespace icsad {

// Half-open frame range [begin, end).
struct FrameRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end > begin ? end - begin : 0; }
  bool intersects(const FrameRange& o) const { return begin < o.end && o.begin < end; }
  bool operator==(const FrameRange&) const = default;
};

enum class ThresholdMethod { MeanPlusKStd, Quantile, Fixed };

struct Threshold {
  ThresholdMethod method = ThresholdMethod::MeanPlusKStd;
  double parameter = 4.0;  // k, q, or the fixed cutoff
  FrameRange calibration_span;
};

// Cutoff from the attack-free calibration span: mean + k * std (population),
// the nearest-rank quantile, or the fixed value verbatim. Throws
// InsufficientCalibration when the span is shorter than `min_span_frames` or
// leaves the score series.
double calibrate(std::span<const double> scores, const Threshold& threshold,
                 std::size_t min_span_frames = 0);

// Longest attack-free prefix usable for calibration: [0, first_attack -
// guard), or the whole series if it has no attacks. Frames before
// `skip_frames` are excluded.
FrameRange calibration_span_from_labels(std::span<const Label> labels, std::size_t guard,
                                        std::size_t skip_frames = 0);

struct FlagParams {
  std::size_t min_duration_frames = 4;
  std::size_t gap_merge_frames = 75;
};

// Maximal runs of score > cutoff lasting at least min_duration frames; runs
// separated by fewer than gap_merge frames are merged afterwards.
std::vector<FrameRange> flag(std::span<const double> scores, double cutoff,
                             const FlagParams& params);

// Maximal runs of identical non-normal labels.
struct AttackInterval {
  Label label = Label::Normal;
  FrameRange frames;
};
std::vector<AttackInterval> attack_intervals(std::span<const Label> labels);

struct AttackMatch {
  Label label = Label::Normal;
  FrameRange frames;
  bool detected = false;
  long latency_frames = 0;  // first flagged frame - attack start, if detected
};

struct DetectionReport {
  std::string detector;
  std::vector<std::string> channels;
  double cutoff = 0.0;
  // Settings that produced the report, in insertion order.
  std::vector<std::pair<std::string, double>> parameters;

  std::vector<FrameRange> flagged_intervals;
  std::vector<AttackMatch> attacks;
  std::vector<FrameRange> false_alarm_intervals;
  std::size_t transition_margin_frames = 0;
  double precision = 0.0;  // flagged intervals that hit a (widened) attack
  double recall = 0.0;     // attacks hit by at least one flagged interval

  std::size_t detected_count() const;
};

// An attack counts as detected if a flagged interval intersects
// [start - margin, end + margin); false alarms intersect no widened attack.
DetectionReport evaluate(std::span<const FrameRange> flagged, std::span<const Label> labels,
                         std::size_t transition_margin_frames);

// Top-k score peaks: repeatedly take the argmax and suppress +-radius.
std::vector<std::size_t> top_peaks(std::span<const double> scores, std::size_t k,
                                   std::size_t radius);

}  // namespace icsad
