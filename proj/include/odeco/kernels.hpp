#pragma once

#include <cstddef>
#include <cstdint>

namespace odeco::kernels {

/// Backend for the data-parallel edge loops of the Dirichlet energy.
/// AVX2 is picked at startup when the CPU supports it; ODECO_KERNEL_BACKEND
/// (scalar|avx2) overrides, and tests switch explicitly.
enum class Backend { Scalar, Avx2 };

Backend active_backend();
void set_backend(Backend b);  // throws ValidationError if unsupported
bool avx2_supported();
const char* backend_name(Backend b);

/// coeffs: nv x 15 row-major coefficient rows.
/// Returns sum_e w[e] * ||f_a - f_b||^2. When per_vertex is non-null
/// (length nv, caller-zeroed) each edge adds half its term to both ends.
double edge_energy(const double* coeffs, const std::int32_t* a,
                   const std::int32_t* b, const double* w, std::size_t ne,
                   double* per_vertex);

/// cograd: nv x 15 row-major, caller-zeroed. Per edge adds 2 w (f_a - f_b)
/// to row a and subtracts it from row b, i.e. d(edge energy)/d(coeffs).
void edge_cogradient(const double* coeffs, const std::int32_t* a,
                     const std::int32_t* b, const double* w, std::size_t ne,
                     double* cograd);

namespace detail {
double edge_energy_scalar(const double* coeffs, const std::int32_t* a,
                          const std::int32_t* b, const double* w,
                          std::size_t ne, double* per_vertex);
void edge_cogradient_scalar(const double* coeffs, const std::int32_t* a,
                            const std::int32_t* b, const double* w,
                            std::size_t ne, double* cograd);
#if defined(ODECO_BUILD_AVX2)
double edge_energy_avx2(const double* coeffs, const std::int32_t* a,
                        const std::int32_t* b, const double* w, std::size_t ne,
                        double* per_vertex);
void edge_cogradient_avx2(const double* coeffs, const std::int32_t* a,
                          const std::int32_t* b, const double* w,
                          std::size_t ne, double* cograd);
#endif
}  // namespace detail

}  // namespace odeco::kernels
