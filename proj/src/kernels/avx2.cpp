#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace prosody::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_squares(const double* x, std::size_t n) { return dot(x, x, n); }

double weighted_sum_squares(const double* x, const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(w + i));
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    const double v = x[i] * w[i];
    total += v * v;
  }
  return total;
}

double sum_abs(const double* x, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
  double total = hsum(acc);
  for (; i < n; ++i) total += std::fabs(x[i]);
  return total;
}

// Four lags per pass so each load of x[i] is reused across the lag block.
void lagged_products(const double* x, std::size_t window, std::size_t min_lag, std::size_t max_lag,
                     double* out) {
  std::size_t lag = min_lag;
  for (; lag + 3 <= max_lag; lag += 4) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= window; i += 4) {
      const __m256d xi = _mm256_loadu_pd(x + i);
      a0 = _mm256_fmadd_pd(xi, _mm256_loadu_pd(x + i + lag), a0);
      a1 = _mm256_fmadd_pd(xi, _mm256_loadu_pd(x + i + lag + 1), a1);
      a2 = _mm256_fmadd_pd(xi, _mm256_loadu_pd(x + i + lag + 2), a2);
      a3 = _mm256_fmadd_pd(xi, _mm256_loadu_pd(x + i + lag + 3), a3);
    }
    double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
    for (; i < window; ++i) {
      s0 += x[i] * x[i + lag];
      s1 += x[i] * x[i + lag + 1];
      s2 += x[i] * x[i + lag + 2];
      s3 += x[i] * x[i + lag + 3];
    }
    out[lag - min_lag] = s0;
    out[lag - min_lag + 1] = s1;
    out[lag - min_lag + 2] = s2;
    out[lag - min_lag + 3] = s3;
  }
  for (; lag <= max_lag; ++lag) out[lag - min_lag] = dot(x, x + lag, window);
}

}  // namespace prosody::kernels::avx2
