#include "odeco/kernels.hpp"

namespace odeco::kernels::detail {

namespace {
constexpr int kW = 15;
}

double edge_energy_scalar(const double* coeffs, const std::int32_t* a,
                          const std::int32_t* b, const double* w,
                          std::size_t ne, double* per_vertex) {
  double total = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    const double* fa = coeffs + kW * static_cast<std::size_t>(a[e]);
    const double* fb = coeffs + kW * static_cast<std::size_t>(b[e]);
    double d2 = 0.0;
    for (int k = 0; k < kW; ++k) {
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

void edge_cogradient_scalar(const double* coeffs, const std::int32_t* a,
                            const std::int32_t* b, const double* w,
                            std::size_t ne, double* cograd) {
  for (std::size_t e = 0; e < ne; ++e) {
    const std::size_t ia = kW * static_cast<std::size_t>(a[e]);
    const std::size_t ib = kW * static_cast<std::size_t>(b[e]);
    const double tw = 2.0 * w[e];
    for (int k = 0; k < kW; ++k) {
      const double g = tw * (coeffs[ia + k] - coeffs[ib + k]);
      cograd[ia + k] += g;
      cograd[ib + k] -= g;
    }
  }
}

}  // namespace odeco::kernels::detail
