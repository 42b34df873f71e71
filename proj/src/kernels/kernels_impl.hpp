#pragma once

#include <cstddef>

namespace prosody::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double weighted_sum_squares(const double* x, const double* w, std::size_t n);
double sum_abs(const double* x, std::size_t n);
void lagged_products(const double* x, std::size_t window, std::size_t min_lag, std::size_t max_lag,
                     double* out);
}  // namespace scalar

#if defined(PROSODY_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double weighted_sum_squares(const double* x, const double* w, std::size_t n);
double sum_abs(const double* x, std::size_t n);
void lagged_products(const double* x, std::size_t window, std::size_t min_lag, std::size_t max_lag,
                     double* out);
}  // namespace avx2
#endif

}  // namespace prosody::kernels
