#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "prosody/error.hpp"
#include "prosody/kernels/kernels.hpp"

namespace prosody::kernels {
namespace {

constexpr KernelTable kScalar{scalar::dot, scalar::sum_squares, scalar::weighted_sum_squares,
                              scalar::sum_abs, scalar::lagged_products};
#if defined(PROSODY_HAVE_AVX2)
constexpr KernelTable kAvx2{avx2::dot, avx2::sum_squares, avx2::weighted_sum_squares, avx2::sum_abs,
                            avx2::lagged_products};
#endif

bool cpu_has_avx2() {
#if defined(PROSODY_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("PROSODY_KERNELS")) {
    const std::string name(env);
    if (name == "scalar") return Backend::scalar;
    if (name == "avx2" && cpu_has_avx2()) return Backend::avx2;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

void check(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("kernel operands differ in length");
}

}  // namespace

bool backend_available(Backend b) { return b == Backend::scalar || cpu_has_avx2(); }

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_available(b))
    throw ConfigError("kernel backend '" + std::string(backend_name(b)) + "' is not available");
  current().store(b, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  throw ConfigError("unknown kernel backend '" + std::string(name) + "'");
}

const KernelTable& table(Backend b) {
#if defined(PROSODY_HAVE_AVX2)
  if (b == Backend::avx2) return kAvx2;
#else
  (void)b;
#endif
  return kScalar;
}

double dot(std::span<const double> a, std::span<const double> b) {
  check(a, b);
  return active().dot(a.data(), b.data(), a.size());
}
double sum_squares(std::span<const double> x) { return active().sum_squares(x.data(), x.size()); }
double weighted_sum_squares(std::span<const double> x, std::span<const double> w) {
  check(x, w);
  return active().weighted_sum_squares(x.data(), w.data(), x.size());
}
double sum_abs(std::span<const double> x) { return active().sum_abs(x.data(), x.size()); }

}  // namespace prosody::kernels
