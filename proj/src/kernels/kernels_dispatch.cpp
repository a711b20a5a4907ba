#include <atomic>
#include <cstdlib>
#include <cstring>

#include "odeco/kernels.hpp"
#include "odeco/types.hpp"

namespace odeco::kernels {

bool avx2_supported() {
#if defined(ODECO_BUILD_AVX2) && defined(__x86_64__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

namespace {

Backend pick_default() {
  if (const char* env = std::getenv("ODECO_KERNEL_BACKEND")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_supported())
      return Backend::Avx2;
  }
  return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend> g_backend{pick_default()};

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2_supported()) {
    throw ValidationError("kernels: AVX2 backend not supported on this CPU");
  }
  g_backend.store(b, std::memory_order_relaxed);
}

const char* backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

double edge_energy(const double* coeffs, const std::int32_t* a,
                   const std::int32_t* b, const double* w, std::size_t ne,
                   double* per_vertex) {
#if defined(ODECO_BUILD_AVX2) && defined(__x86_64__)
  if (active_backend() == Backend::Avx2) {
    return detail::edge_energy_avx2(coeffs, a, b, w, ne, per_vertex);
  }
#endif
  return detail::edge_energy_scalar(coeffs, a, b, w, ne, per_vertex);
}

void edge_cogradient(const double* coeffs, const std::int32_t* a,
                     const std::int32_t* b, const double* w, std::size_t ne,
                     double* cograd) {
#if defined(ODECO_BUILD_AVX2) && defined(__x86_64__)
  if (active_backend() == Backend::Avx2) {
    detail::edge_cogradient_avx2(coeffs, a, b, w, ne, cograd);
    return;
  }
#endif
  detail::edge_cogradient_scalar(coeffs, a, b, w, ne, cograd);
}

}  // namespace odeco::kernels
