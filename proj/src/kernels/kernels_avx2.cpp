#include "odeco/kernels.hpp"

#if defined(ODECO_BUILD_AVX2) && defined(__x86_64__)

#include <immintrin.h>

namespace odeco::kernels::detail {

namespace {
constexpr int kW = 15;

// Horizontal sum with a fixed lane order so results are reproducible
// run-to-run for a given backend.
inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}
}  // namespace

double edge_energy_avx2(const double* coeffs, const std::int32_t* a,
                        const std::int32_t* b, const double* w, std::size_t ne,
                        double* per_vertex) {
  double total = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    const double* fa = coeffs + kW * static_cast<std::size_t>(a[e]);
    const double* fb = coeffs + kW * static_cast<std::size_t>(b[e]);
    __m256d acc = _mm256_setzero_pd();
    // 15 doubles: three 4-lane blocks plus a 3-element tail.
    for (int k = 0; k < 12; k += 4) {
      const __m256d d =
          _mm256_sub_pd(_mm256_loadu_pd(fa + k), _mm256_loadu_pd(fb + k));
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    double d2 = hsum(acc);
    for (int k = 12; k < kW; ++k) {
      const double d = fa[k] - fb[k];
      d2 += d * d;
    }
    const double term = w[e] * d2;
    total += term;
    if (per_vertex) {
      per_vertex[a[e]] += 0.5 * term;
      per_vertex[b[e]] += 0.5 * term;
    }
  }
  return total;
}

void edge_cogradient_avx2(const double* coeffs, const std::int32_t* a,
                          const std::int32_t* b, const double* w,
                          std::size_t ne, double* cograd) {
  for (std::size_t e = 0; e < ne; ++e) {
    const std::size_t ia = kW * static_cast<std::size_t>(a[e]);
    const std::size_t ib = kW * static_cast<std::size_t>(b[e]);
    const __m256d tw = _mm256_set1_pd(2.0 * w[e]);
    for (int k = 0; k < 12; k += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(coeffs + ia + k),
                                      _mm256_loadu_pd(coeffs + ib + k));
      const __m256d g = _mm256_mul_pd(tw, d);
      _mm256_storeu_pd(cograd + ia + k,
                       _mm256_add_pd(_mm256_loadu_pd(cograd + ia + k), g));
      _mm256_storeu_pd(cograd + ib + k,
                       _mm256_sub_pd(_mm256_loadu_pd(cograd + ib + k), g));
    }
    const double tws = 2.0 * w[e];
    for (int k = 12; k < kW; ++k) {
      const double g = tws * (coeffs[ia + k] - coeffs[ib + k]);
      cograd[ia + k] += g;
      cograd[ib + k] -= g;
    }
  }
}

}  // namespace odeco::kernels::detail

#endif  // ODECO_BUILD_AVX2 && __x86_64__
