#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace icsad {

struct MpConfig {
  std::size_t m = 300;                 // window length in samples
  std::size_t exclusion_radius = 150;  // |i - j| <= radius is a trivial match
  double std_epsilon = 1e-8;           // windows below this std are degenerate

  // Window length with the default exclusion radius ceil(m / 2).
  static MpConfig for_window(std::size_t m, double std_epsilon = 1e-8);
  // Throws ConfigError unless 2 <= m <= n / 2, radius >= 1 and epsilon > 0.
  void validate(std::size_t series_length) const;
};

// 1e-8 of the series' full scale (max - min); 1e-8 for a flat series.
double default_std_epsilon(std::span<const double> series);

struct MatrixProfile {
  std::vector<double> distances;            // length n - m + 1
  std::vector<std::size_t> neighbor_index;  // nearest non-trivial match
  MpConfig config;

  std::size_t size() const { return distances.size(); }
};

// Reference self-join: explicit z-normalised Euclidean distances between
// every pair of windows, O(n^2 m). Throws DegenerateWindow.
MatrixProfile mp_brute(std::span<const double> series, const MpConfig& config);

// STOMP-style self-join. The first row of sliding dot products comes from an
// FFT; each diagonal is then updated in O(1) per cell. O(n^2).
MatrixProfile mp_fast(std::span<const double> series, const MpConfig& config);

// Normalised autocorrelation (acf[0] == 1) of the mean-removed series.
std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag);

struct PeriodEstimate {
  std::size_t lag_samples = 0;
  double period_s = 0.0;
  double peak_value = 0.0;
  std::vector<double> acf;
};

// Minimum autocorrelation a peak must exceed to count as periodic.
inline constexpr double kAcfProminenceFloor = 0.2;

// Finds the first autocorrelation hill above the prominence floor after the
// zero-lag lobe has decayed below it and returns the lag of its maximum.
// Throws NoPeriodicity when there is none.
PeriodEstimate estimate_period(std::span<const double> series, double sample_rate_hz,
                               double prominence_floor = kAcfProminenceFloor);

// Window length in samples matching one period of the series.
std::size_t choose_window(std::span<const double> series, double sample_rate_hz);

// Per-frame anomaly score of length n: frame i takes the largest profile
// value among the windows [i - m + 1, i] that cover it, then the maximum
// across channels.
std::vector<double> mp_score(std::span<const MatrixProfile> profiles);

}  // namespace icsad
