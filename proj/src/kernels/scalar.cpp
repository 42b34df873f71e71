#include <cmath>

#include "kernels_impl.hpp"

namespace prosody::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_squares(const double* x, std::size_t n) { return dot(x, x, n); }

double weighted_sum_squares(const double* x, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x[i] * w[i];
    acc += v * v;
  }
  return acc;
}

double sum_abs(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(x[i]);
  return acc;
}

void lagged_products(const double* x, std::size_t window, std::size_t min_lag, std::size_t max_lag,
                     double* out) {
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) out[lag - min_lag] = dot(x, x + lag, window);
}

}  // namespace prosody::kernels::scalar
