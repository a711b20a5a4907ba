#pragma once

#include "odeco/theory.hpp"

namespace odeco {

/// Finite-difference verification of the boundary gradient-norm formula on
/// analytic patches. `fd_total` is the numerically differentiated
/// |grad f|^2 of a normal-aligned field sampled on the surface;
/// `predicted` comes from predicted_gradient_norm with the analytic
/// curvatures and a numerically transported twist.
struct PatchOracleResult {
  double fd_total = 0.0;
  double predicted = 0.0;
  double rel_err = 0.0;
  double omega = 0.0;
  double phi = 0.0;
};

/// Umbilic check: sphere of the given radius, field frame from a projected
/// constant vector (twists over the sphere; omega measured numerically).
PatchOracleResult sphere_patch_gradient_check(const Vec3& lambda,
                                              double radius);

/// Non-umbilic check: cylinder side at the given in-plane angle phi between
/// the x-lobe and the axis (the minimum-curvature direction); the principal
/// frame is twist-free so omega = 0.
PatchOracleResult cylinder_patch_gradient_check(const Vec3& lambda,
                                                double radius, double phi);

/// ||L_axis B lambda||^2 must equal the matching g_k factor; ties the
/// angular-momentum tables to the closed form. Returns the worst absolute
/// mismatch over the three axes.
double generator_norm_vs_g_factor(const Vec3& lambda);

}  // namespace odeco
