#pragma once

#include <string>

#include "odeco/types.hpp"

namespace odeco {

/// Evaluates the 15 orthonormal real spherical harmonics (bands 0, 2, 4,
/// Condon-Shortley-free) at a unit direction.
Vec15 sh_basis(const Vec3& dir);

/// Coefficient-space operator of an arbitrary 3x3 rotation, computed by
/// numerical projection with a spherical product quadrature that is exact
/// for band-4 integrands. Used to build the fixed tables and as a slow
/// reference elsewhere.
Mat15 coeff_rotation_numeric(const Mat3& rot);

/// Applies the analytic z-axis rotation exp(angle * Lz) to a coefficient
/// vector in place: each (m, -m) pair mixes by cos/sin(m * angle).
void zrot_apply(double angle, Vec15& coeffs);

/// Same rotation as a dense matrix (mostly for tests and operator assembly).
Mat15 zrot_matrix(double angle);

/// Fixed operator tables shared by the whole library.
///
/// Sign convention: operators act on coefficients of f via
/// (R.f)(d) = f(R3^T d), which makes the map R3 -> R15 a group
/// representation; the commutators close as [Lx, Ly] = +Lz (and cyclic).
struct ShTables {
  Mat15 Lx, Ly, Lz;        // angular momentum generators
  Mat15 conj_y90;          // coefficient operator of R_y(+90 deg)
  Mat15 conj_xm90;         // coefficient operator of R_x(-90 deg)
  Mat15x3 stretch_basis;   // B: lambda -> canonical coefficients
};

/// Returns the process-wide table singleton. On first use the tables are
/// loaded from the binary cache file when present (and version-compatible)
/// and regenerated otherwise.
const ShTables& tables();

/// Computes tables from scratch (quadrature projection); deterministic.
ShTables build_tables();

/// Cache location: $ODECO_TABLE_CACHE if set, else
/// $XDG_CACHE_HOME/odecofield/tables_v1.bin, else $HOME/.cache/... ;
/// empty string disables caching.
std::string table_cache_path();
bool save_tables(const ShTables& t, const std::string& path);
bool load_tables(ShTables& t, const std::string& path);

}  // namespace odeco
