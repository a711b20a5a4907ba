#pragma once

#include <utility>

#include "odeco/sh_tables.hpp"
#include "odeco/types.hpp"

namespace odeco {

/// A degree-4 odeco tensor as 15 real-SH coefficients (bands 0, 2, 4).
/// The represented homogeneous polynomial is sum_k coeffs[k] * Y_k(d).
using OdecoVec = Vec15;

/// Orientation parameters follow the fixed product order
/// R(theta) = exp(theta.x Lx) exp(theta.y Ly) exp(theta.z Lz),
/// each factor a right-handed rotation about the named axis.
Mat15 rotation_operator(const Vec3& theta);

/// 3x3 rotation with the same Euler triple and product order.
Mat3 euler_to_matrix(const Vec3& theta);

/// Inverse of euler_to_matrix; gimbal-locked inputs resolve with theta.z = 0.
Vec3 matrix_to_euler(const Mat3& rot);

/// Canonical axis-aligned tensor f_hat(lambda) = B * lambda, i.e. the
/// projection of lambda.x x^4 + lambda.y y^4 + lambda.z z^4.
OdecoVec canonical_tensor(const Vec3& lambda);

/// Minimal-angle 3x3 rotation sending the z-axis onto `axis` (unit).
/// For axis ~ -z the result is the fixed pi-rotation about x.
Mat3 axis_frame(const Vec3& axis);

/// Coefficient-space rotation aligning the canonical z-axis with a unit
/// normal. Throws ValidationError for non-unit input.
Mat15 normal_rotation(const Vec3& normal);

/// Boundary tensor  R_n * exp(theta_z Lz) * f_hat(lambda).
OdecoVec boundary_tensor(const Vec3& normal, double theta_z,
                         const Vec3& lambda);

/// Eigendecomposition of a symmetric 3x3 into (theta, lambda) with lambda
/// sorted descending and a right-handed eigenvector frame. `prev_frame`,
/// when given, disambiguates (nearly) repeated eigenvalues by picking the
/// eigenvector assignment closest to it.
std::pair<Vec3, Vec3> from_symmetric_matrix(const Mat3& sym,
                                            const Mat3* prev_frame = nullptr);

/// Value of the represented polynomial at a unit direction.
double evaluate_polynomial(const OdecoVec& f, const Vec3& dir);

/// Frame axes scaled by the stretching ratios: columns of R3(theta) * diag(lambda).
Mat3 glyph_frame(const Vec3& theta, const Vec3& lambda);

/// Boundary variant: R3 composed from the axis frame and the z-spin.
Mat3 glyph_frame_axis(const Vec3& axis, double theta_z, const Vec3& lambda);

/// Symmetric 3x3 "glyph matrix" frame * diag(lambda) * frame^T used for
/// export, interpolation and curve tracing.
Mat3 glyph_matrix(const Mat3& frame, const Vec3& lambda);

namespace detail {
/// Applies exp(a Lx), exp(a Ly) to a vector via the fixed conjugators
/// (two dense mat-vecs and one analytic z-rotation each); building the
/// full 15x15 operator is never needed on hot paths.
Vec15 xrot_apply(double angle, const Vec15& v);
Vec15 yrot_apply(double angle, const Vec15& v);
}  // namespace detail

}  // namespace odeco
