#include "icsad/detect_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "icsad/errors.hpp"

namespace icsad {

double calibrate(std::span<const double> scores, const Threshold& threshold,
                 std::size_t min_span_frames) {
  if (threshold.method == ThresholdMethod::Fixed) return threshold.parameter;

  const FrameRange span = threshold.calibration_span;
  if (span.end > scores.size() || span.begin >= span.end)
    throw InsufficientCalibration("calibration span [" + std::to_string(span.begin) + ", " +
                                  std::to_string(span.end) + ") is empty or outside the scores");
  if (span.length() < min_span_frames)
    throw InsufficientCalibration("calibration span of " + std::to_string(span.length()) +
                                  " frames is shorter than the required " +
                                  std::to_string(min_span_frames));
  const auto values = scores.subspan(span.begin, span.length());
  const auto n = static_cast<double>(values.size());

  if (threshold.method == ThresholdMethod::MeanPlusKStd) {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return mean + threshold.parameter * std::sqrt(ss / n);
  }

  const double q = threshold.parameter;
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("quantile must be in (0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Nearest rank: the ceil(q * N)-th smallest value.
  const auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

FrameRange calibration_span_from_labels(std::span<const Label> labels, std::size_t guard,
                                        std::size_t skip_frames) {
  const auto first = std::find_if(labels.begin(), labels.end(),
                                  [](Label l) { return l != Label::Normal; });
  std::size_t end = labels.size();
  if (first != labels.end()) {
    const auto at = static_cast<std::size_t>(first - labels.begin());
    end = at > guard ? at - guard : 0;
  }
  return FrameRange{std::min(skip_frames, end), end};
}

std::vector<FrameRange> flag(std::span<const double> scores, double cutoff,
                             const FlagParams& params) {
  std::vector<FrameRange> runs;
  const std::size_t min_len = std::max<std::size_t>(1, params.min_duration_frames);
  for (std::size_t i = 0; i < scores.size();) {
    if (!(scores[i] > cutoff)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < scores.size() && scores[j] > cutoff) ++j;
    if (j - i >= min_len) runs.push_back({i, j});
    i = j;
  }
  std::vector<FrameRange> merged;
  for (const auto& r : runs) {
    if (!merged.empty() && r.begin - merged.back().end < params.gap_merge_frames) {
      merged.back().end = r.end;
    } else {
      merged.push_back(r);
    }
  }
  return merged;
}

std::vector<AttackInterval> attack_intervals(std::span<const Label> labels) {
  std::vector<AttackInterval> out;
  for (std::size_t i = 0; i < labels.size();) {
    if (labels[i] == Label::Normal) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < labels.size() && labels[j] == labels[i]) ++j;
    out.push_back({labels[i], {i, j}});
    i = j;
  }
  return out;
}

std::size_t DetectionReport::detected_count() const {
  return static_cast<std::size_t>(
      std::count_if(attacks.begin(), attacks.end(), [](const AttackMatch& a) { return a.detected; }));
}

DetectionReport evaluate(std::span<const FrameRange> flagged, std::span<const Label> labels,
                         std::size_t margin) {
  DetectionReport report;
  report.flagged_intervals.assign(flagged.begin(), flagged.end());
  report.transition_margin_frames = margin;

  std::vector<FrameRange> widened;
  for (const auto& a : attack_intervals(labels)) {
    const FrameRange w{a.frames.begin > margin ? a.frames.begin - margin : 0,
                       a.frames.end + margin};
    widened.push_back(w);
    AttackMatch match{a.label, a.frames, false, 0};
    for (const auto& f : flagged) {
      if (!f.intersects(w)) continue;
      const std::size_t first = std::max(f.begin, w.begin);
      const long latency = static_cast<long>(first) - static_cast<long>(a.frames.begin);
      if (!match.detected || latency < match.latency_frames) match.latency_frames = latency;
      match.detected = true;
    }
    report.attacks.push_back(match);
  }

  std::size_t true_flags = 0;
  for (const auto& f : flagged) {
    const bool hit = std::any_of(widened.begin(), widened.end(),
                                 [&f](const FrameRange& w) { return f.intersects(w); });
    if (hit) {
      ++true_flags;
    } else {
      report.false_alarm_intervals.push_back(f);
    }
  }
  report.precision =
      flagged.empty() ? 0.0 : static_cast<double>(true_flags) / static_cast<double>(flagged.size());
  report.recall = report.attacks.empty() ? 0.0
                                         : static_cast<double>(report.detected_count()) /
                                               static_cast<double>(report.attacks.size());
  return report;
}

std::vector<std::size_t> top_peaks(std::span<const double> scores, std::size_t k,
                                   std::size_t radius) {
  std::vector<bool> suppressed(scores.size(), false);
  std::vector<std::size_t> peaks;
  while (peaks.size() < k) {
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (!suppressed[i] && (best == scores.size() || scores[i] > scores[best])) best = i;
    if (best == scores.size()) break;
    peaks.push_back(best);
    const std::size_t lo = best > radius ? best - radius : 0;
    const std::size_t hi = std::min(scores.size(), best + radius + 1);
    std::fill(suppressed.begin() + static_cast<std::ptrdiff_t>(lo),
              suppressed.begin() + static_cast<std::ptrdiff_t>(hi), true);
  }
  return peaks;
}

}  // namespace icsad
