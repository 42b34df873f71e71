#pragma once

// Data-parallel inner loops used by the signal, structure and feature stages.
//
// Every kernel has a scalar reference implementation and, on x86-64 builds
// with compiler support, an AVX2/FMA variant. The variant is chosen once at
// startup from CPUID; PROSODY_KERNELS=scalar|avx2 in the environment or
// set_backend() overrides the choice. Results of the two backends agree to
// rounding (the vector variants reassociate sums), so bit-exact output is
// only guaranteed for a fixed backend, which the run manifest records.

#include <cstddef>
#include <span>
#include <string_view>

namespace prosody::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  // sum of (x[i] * w[i])^2
  double (*weighted_sum_squares)(const double* x, const double* w, std::size_t n);
  double (*sum_abs)(const double* x, std::size_t n);
  // out[l - min_lag] = sum_{i < window} x[i] * x[i + l] for l in [min_lag, max_lag];
  // x must hold window + max_lag samples.
  void (*lagged_products)(const double* x, std::size_t window, std::size_t min_lag,
                          std::size_t max_lag, double* out);
};

bool backend_available(Backend b);
Backend active_backend();
/// Throws ConfigError when the backend is not compiled in or not supported by the CPU.
void set_backend(Backend b);
std::string_view backend_name(Backend b);
Backend parse_backend(std::string_view name);

const KernelTable& table(Backend b);
inline const KernelTable& active() { return table(active_backend()); }

double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> x);
double weighted_sum_squares(std::span<const double> x, std::span<const double> w);
double sum_abs(std::span<const double> x);

}  // namespace prosody::kernels
