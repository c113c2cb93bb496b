#include "icsad/fft.hpp"

#include <complex>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace icsad::fft {

namespace {

// fftw's planner is not re-entrant.
std::mutex planner_mutex;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    if (plan != nullptr) {
      std::lock_guard lock(planner_mutex);
      fftw_destroy_plan(plan);
    }
  }
};

std::size_t next_fast_size(std::size_t n) {
  // Smallest 2^a 3^b 5^c >= n.
  for (std::size_t size = n;; ++size) {
    std::size_t r = size;
    for (std::size_t p : {2u, 3u, 5u})
      while (r % p == 0) r /= p;
    if (r == 1) return size;
  }
}

// Returns the circular correlation c[j] = sum_k a[k] b[j + k] computed on a
// zero-padded grid of length `size` (entries beyond the valid range are
// wrap-around garbage and are never read by callers).
std::vector<double> correlate(std::span<const double> a, std::span<const double> b,
                              std::size_t size) {
  const std::size_t bins = size / 2 + 1;
  auto ra = fftw_buffer<double>(size);
  auto rb = fftw_buffer<double>(size);
  auto ca = fftw_buffer<fftw_complex>(bins);
  auto cb = fftw_buffer<fftw_complex>(bins);
  std::fill(ra.get(), ra.get() + size, 0.0);
  std::fill(rb.get(), rb.get() + size, 0.0);
  std::copy(a.begin(), a.end(), ra.get());
  std::copy(b.begin(), b.end(), rb.get());

  Plan fa, fb, inv;
  {
    std::lock_guard lock(planner_mutex);
    const int n = static_cast<int>(size);
    fa.plan = fftw_plan_dft_r2c_1d(n, ra.get(), ca.get(), FFTW_ESTIMATE);
    fb.plan = fftw_plan_dft_r2c_1d(n, rb.get(), cb.get(), FFTW_ESTIMATE);
    inv.plan = fftw_plan_dft_c2r_1d(n, ca.get(), ra.get(), FFTW_ESTIMATE);
  }
  fftw_execute(fa.plan);
  fftw_execute(fb.plan);
  // conj(A) * B gives the correlation of a against b.
  for (std::size_t k = 0; k < bins; ++k) {
    const std::complex<double> x(ca[k][0], -ca[k][1]);
    const std::complex<double> y(cb[k][0], cb[k][1]);
    const auto z = x * y;
    ca[k][0] = z.real();
    ca[k][1] = z.imag();
  }
  fftw_execute(inv.plan);
  std::vector<double> out(ra.get(), ra.get() + size);
  const double scale = 1.0 / static_cast<double>(size);
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace

std::vector<double> sliding_dot_product(std::span<const double> query,
                                        std::span<const double> series) {
  const std::size_t m = query.size();
  const std::size_t n = series.size();
  if (m == 0 || m > n) throw std::invalid_argument("sliding_dot_product: bad query length");
  auto full = correlate(query, series, next_fast_size(n + m));
  full.resize(n - m + 1);
  return full;
}

std::vector<double> autocorrelation_sums(std::span<const double> x, std::size_t max_lag) {
  if (max_lag >= x.size()) max_lag = x.size() - 1;
  auto full = correlate(x, x, next_fast_size(2 * x.size()));
  full.resize(max_lag + 1);
  return full;
}

}  // namespace icsad::fft
