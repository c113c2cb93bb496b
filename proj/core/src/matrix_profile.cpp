#include "icsad/matrix_profile.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "icsad/errors.hpp"
#include "icsad/fft.hpp"

namespace icsad {

namespace {

struct WindowStats {
  std::vector<double> mean;
  std::vector<double> std;
};

// Two-pass mean and population standard deviation of every length-m window.
WindowStats window_stats(std::span<const double> x, std::size_t m, double std_epsilon) {
  const std::size_t count = x.size() - m + 1;
  WindowStats s{std::vector<double>(count), std::vector<double>(count)};
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < count; ++i) {
    const auto w = x.subspan(i, m);
    const double mu = std::accumulate(w.begin(), w.end(), 0.0) * inv_m;
    double ss = 0.0;
    for (double v : w) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss * inv_m);
    if (!(sd >= std_epsilon)) throw DegenerateWindow(i);
    s.mean[i] = mu;
    s.std[i] = sd;
  }
  return s;
}

MatrixProfile empty_profile(std::size_t count, const MpConfig& config) {
  MatrixProfile p;
  p.config = config;
  // Rows without an admissible neighbour keep the distance upper bound.
  p.distances.assign(count, 2.0 * std::sqrt(static_cast<double>(config.m)));
  p.neighbor_index.assign(count, std::numeric_limits<std::size_t>::max());
  return p;
}

}  // namespace

MpConfig MpConfig::for_window(std::size_t m, double std_epsilon) {
  return MpConfig{m, (m + 1) / 2, std_epsilon};
}

void MpConfig::validate(std::size_t n) const {
  if (m < 2) throw ConfigError("window length m must be at least 2");
  if (2 * m > n)
    throw ConfigError("window length m=" + std::to_string(m) +
                      " exceeds half the series length " + std::to_string(n));
  if (exclusion_radius < 1) throw ConfigError("exclusion radius must be at least 1");
  if (!(std_epsilon > 0.0)) throw ConfigError("std_epsilon must be positive");
}

double default_std_epsilon(std::span<const double> series) {
  if (series.empty()) return 1e-8;
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  const double range = *hi - *lo;
  return range > 0.0 ? 1e-8 * range : 1e-8;
}

MatrixProfile mp_brute(std::span<const double> series, const MpConfig& config) {
  config.validate(series.size());
  const std::size_t m = config.m;
  const std::size_t count = series.size() - m + 1;
  const auto stats = window_stats(series, m, config.std_epsilon);

  // z-normalised copies of every window, row-major.
  std::vector<double> z(count * m);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t k = 0; k < m; ++k)
      z[i * m + k] = (series[i + k] - stats.mean[i]) / stats.std[i];

  MatrixProfile p = empty_profile(count, config);
  std::vector<double> best(count, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < count; ++i) {
    const double* zi = &z[i * m];
    for (std::size_t j = i + config.exclusion_radius + 1; j < count; ++j) {
      const double* zj = &z[j * m];
      double ss = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double d = zi[k] - zj[k];
        ss += d * d;
      }
      if (ss < best[i]) {
        best[i] = ss;
        p.neighbor_index[i] = j;
      }
      if (ss < best[j]) {
        best[j] = ss;
        p.neighbor_index[j] = i;
      }
    }
  }
  for (std::size_t i = 0; i < count; ++i)
    if (std::isfinite(best[i])) p.distances[i] = std::sqrt(best[i]);
  return p;
}

MatrixProfile mp_fast(std::span<const double> series, const MpConfig& config) {
  config.validate(series.size());
  const std::size_t m = config.m;
  const std::size_t count = series.size() - m + 1;
  const double md = static_cast<double>(m);

  // Removing the global mean leaves z-normalised distances unchanged and
  // keeps the dot-product identity well conditioned under large offsets.
  const double offset =
      std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  std::vector<double> x(series.begin(), series.end());
  for (double& v : x) v -= offset;

  const auto stats = window_stats(x, m, config.std_epsilon);
  std::vector<double> inv_std(count);
  for (std::size_t i = 0; i < count; ++i) inv_std[i] = 1.0 / (md * stats.std[i]);

  const auto first_row = fft::sliding_dot_product(std::span<const double>(x).first(m), x);

  std::vector<double> best(count, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> index(count, std::numeric_limits<std::size_t>::max());
  for (std::size_t k = config.exclusion_radius + 1; k < count; ++k) {
    double qt = first_row[k];
    for (std::size_t i = 0, j = k; j < count; ++i, ++j) {
      if (i > 0) qt += x[i + m - 1] * x[j + m - 1] - x[i - 1] * x[j - 1];
      const double corr =
          (qt - md * stats.mean[i] * stats.mean[j]) * inv_std[i] * (1.0 / stats.std[j]);
      if (corr > best[i]) {
        best[i] = corr;
        index[i] = j;
      }
      if (corr > best[j]) {
        best[j] = corr;
        index[j] = i;
      }
    }
  }

  MatrixProfile p = empty_profile(count, config);
  for (std::size_t i = 0; i < count; ++i) {
    if (index[i] == std::numeric_limits<std::size_t>::max()) continue;
    const double corr = std::clamp(best[i], -1.0, 1.0);
    p.distances[i] = std::sqrt(std::max(0.0, 2.0 * md * (1.0 - corr)));
    p.neighbor_index[i] = index[i];
  }
  return p;
}

std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
  if (series.size() < 2) throw ConfigError("autocorrelation needs at least two samples");
  const double mean =
      std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  std::vector<double> x(series.begin(), series.end());
  for (double& v : x) v -= mean;
  auto r = fft::autocorrelation_sums(x, max_lag);
  const double r0 = r.front();
  if (!(r0 > 0.0)) throw NoPeriodicity("series has zero variance");
  for (double& v : r) v /= r0;
  return r;
}

PeriodEstimate estimate_period(std::span<const double> series, double sample_rate_hz,
                               double floor) {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  PeriodEstimate est;
  est.acf = autocorrelation(series, series.size() / 2);
  const auto& acf = est.acf;

  std::size_t k = 1;
  while (k < acf.size() && acf[k] > floor) ++k;  // leave the zero-lag lobe
  while (k < acf.size() && acf[k] <= floor) ++k;
  if (k >= acf.size())
    throw NoPeriodicity("no autocorrelation peak above " + std::to_string(floor));

  std::size_t peak = k;
  for (; k < acf.size() && acf[k] > floor; ++k)
    if (acf[k] > acf[peak]) peak = k;

  est.lag_samples = peak;
  est.peak_value = acf[peak];
  est.period_s = static_cast<double>(peak) / sample_rate_hz;
  return est;
}

std::size_t choose_window(std::span<const double> series, double sample_rate_hz) {
  const auto est = estimate_period(series, sample_rate_hz);
  return static_cast<std::size_t>(std::lround(est.period_s * sample_rate_hz));
}

std::vector<double> mp_score(std::span<const MatrixProfile> profiles) {
  if (profiles.empty()) return {};
  const std::size_t m = profiles.front().config.m;
  const std::size_t count = profiles.front().size();
  for (const auto& p : profiles)
    if (p.config.m != m || p.size() != count)
      throw ConfigError("mp_score: profiles differ in window length or series length");

  const std::size_t n = count + m - 1;
  std::vector<double> score(n, -std::numeric_limits<double>::infinity());
  std::deque<std::size_t> window;  // indices of a decreasing run of profile values
  for (const auto& p : profiles) {
    window.clear();
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (next < count && next <= i) {
        while (!window.empty() && p.distances[window.back()] <= p.distances[next])
          window.pop_back();
        window.push_back(next++);
      }
      while (window.front() + m <= i) window.pop_front();
      score[i] = std::max(score[i], p.distances[window.front()]);
    }
  }
  return score;
}

}  // namespace icsad
