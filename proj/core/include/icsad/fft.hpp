#pragma once

#include <span>
#include <vector>

namespace icsad::fft {

// Linear cross-correlation via real FFTs:
// out[j] = sum_k query[k] * series[j + k] for j in [0, n - m].
std::vector<double> sliding_dot_product(std::span<const double> query,
                                        std::span<const double> series);

// Raw (unnormalised, biased) autocovariance sums r[k] = sum_t x[t] x[t + k]
// for k in [0, max_lag].
std::vector<double> autocorrelation_sums(std::span<const double> x, std::size_t max_lag);

}  // namespace icsad::fft
