#include "odeco/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "odeco/algebra.hpp"

namespace odeco {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double idx = p * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (idx - lo) * (v[hi] - v[lo]);
}

/// Tensor whose z-lobe is normal-aligned and whose x-lobe sits at angle
/// phi (about the normal) from a given tangential reference direction.
Vec15 plane_tensor(const Vec3& normal, const Vec3& tangent_ref, double phi,
                   const Vec3& lambda) {
  const Vec3 t1 =
      std::cos(phi) * tangent_ref + std::sin(phi) * normal.cross(tangent_ref);
  Mat3 frame;
  frame.col(0) = t1;
  frame.col(1) = normal.cross(t1);
  frame.col(2) = normal;
  return rotation_operator(matrix_to_euler(frame)) * canonical_tensor(lambda);
}

}  // namespace

double g_factor(const Vec3& lambda, int k) {
  static const int pair_m[3] = {1, 0, 0};  // {y,z}, {x,z}, {x,y}
  static const int pair_n[3] = {2, 2, 1};
  if (k < 1 || k > 3) throw ValidationError("g_factor: k must be 1, 2 or 3");
  const double lm = lambda[pair_m[k - 1]];
  const double ln = lambda[pair_n[k - 1]];
  return (64.0 * kPi / 315.0) *
         (4.0 * (lm - ln) * (lm - ln) + (lm + ln) * (lm + ln));
}

BoundaryEnergyPrediction predicted_gradient_norm(const Vec3& lambda,
                                                 double phi, double k_max,
                                                 double k_min, double omega) {
  BoundaryEnergyPrediction out;
  out.lambda = lambda;
  out.phi = phi;
  out.k_max = k_max;
  out.k_min = k_min;
  out.omega = omega;
  out.g1 = g_factor(lambda, 1);
  out.g2 = g_factor(lambda, 2);
  out.g3 = g_factor(lambda, 3);
  const double c2 = std::cos(phi) * std::cos(phi);
  const double s2 = std::sin(phi) * std::sin(phi);
  out.curvature_term = (c2 * out.g1 + s2 * out.g2) * k_max * k_max +
                       (s2 * out.g1 + c2 * out.g2) * k_min * k_min;
  out.twist_term = out.g3 * omega;
  out.total = out.curvature_term + out.twist_term;
  return out;
}

CurvatureAlignment curvature_alignment_predicate(const Vec3& lambda) {
  const double tol = 1e-9 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  const double critical = (5.0 / 6.0) * (lambda.x() + lambda.y());
  if (std::abs(lambda.x() - lambda.y()) <= tol) {
    return CurvatureAlignment::NoPreference;
  }
  if (std::abs(lambda.z() - critical) <= tol) {
    return CurvatureAlignment::NoPreference;
  }
  return (lambda.z() < critical)
             ? CurvatureAlignment::AlignLargeLobeToMinCurv
             : CurvatureAlignment::AlignLargeLobeToMaxCurv;
}

const char* curvature_alignment_name(CurvatureAlignment a) {
  switch (a) {
    case CurvatureAlignment::AlignLargeLobeToMinCurv: return "min_curvature";
    case CurvatureAlignment::AlignLargeLobeToMaxCurv: return "max_curvature";
    case CurvatureAlignment::NoPreference: return "no_preference";
  }
  return "?";
}

PairEnergyScan pair_energy_scan(const Vec3& lambda, double dihedral_delta,
                                int grid_n) {
  if (grid_n < 8) throw ValidationError("pair_energy_scan: grid_n >= 8");
  if (!(dihedral_delta > 0.0 && dihedral_delta <= kPi))
    throw ValidationError("pair_energy_scan: dihedral must be in (0, pi]");

  // Half-planes hinged on the x-axis with opening angle delta; the shared
  // edge is x. In-plane directions u_k and outward-consistent normals n_k.
  const double half = 0.5 * dihedral_delta;
  const Vec3 edge(1, 0, 0);
  const Vec3 u1(0, std::cos(half), std::sin(half));
  const Vec3 u2(0, std::cos(half), -std::sin(half));
  const Vec3 n1 = edge.cross(u1).normalized();
  const Vec3 n2 = -edge.cross(u2).normalized();

  PairEnergyScan scan;
  scan.grid_n = grid_n;
  scan.phi_step = kPi / grid_n;
  scan.energy.resize(static_cast<std::size_t>(grid_n) * grid_n);

  std::vector<Vec15> f1(grid_n), f2(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    const double phi = i * scan.phi_step;
    f1[i] = plane_tensor(n1, edge, phi, lambda);
    f2[i] = plane_tensor(n2, edge, phi, lambda);
  }
  double best = 1e300;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const double e = (f1[i] - f2[j]).squaredNorm();
      scan.energy[i * grid_n + j] = e;
      if (e < best) {
        best = e;
        scan.argmin_i = i;
        scan.argmin_j = j;
      }
    }
  }
  return scan;
}

ConformityReport boundary_conformity_report(const TetMesh& mesh,
                                            const BoundaryData& boundary,
                                            const FrameField& field) {
  ConformityReport report;
  std::vector<double> angles;
  std::vector<double> feature_angles;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!mesh.boundary_flag[v]) continue;
    const VertexFrame& fr = field.frames[v];

    if (fr.cls == VertexClass::FeatureEdge || fr.cls == VertexClass::Corner) {
      // major lobe vs. the feature tangent
      const Mat3 frame = field.frame3(v);
      int arg = 0;
      fr.lambda.maxCoeff(&arg);
      const Vec3 major = frame.col(arg).normalized();
      const double c = std::clamp(
          std::abs(major.dot(boundary.feature_tangents[v])), 0.0, 1.0);
      const double angle = std::acos(c) * 180.0 / kPi;
      feature_angles.push_back(angle);
      report.feature_entries.push_back(
          {v, angle, CurvatureAlignment::NoPreference});
      continue;
    }
    if (!boundary.curvature_valid[v]) continue;

    const CurvatureAlignment pref = curvature_alignment_predicate(fr.lambda);
    if (pref == CurvatureAlignment::NoPreference) {
      report.skipped_no_preference += 1;
      continue;
    }
    const double kmax = boundary.k_max[v], kmin = boundary.k_min[v];
    if (std::abs(kmax - kmin) <=
        0.1 * (std::abs(kmax) + std::abs(kmin)) + 1e-12) {
      report.skipped_noise_floor += 1;  // (near-)umbilic: direction is noise
      continue;
    }

    // larger tangential lobe (x vs y slot) of the realized frame
    const Mat3 frame = field.frame3(v);
    const int tangential = (fr.lambda.x() >= fr.lambda.y()) ? 0 : 1;
    const Vec3 lobe = frame.col(tangential).normalized();
    const Vec3 target = (pref == CurvatureAlignment::AlignLargeLobeToMinCurv)
                            ? boundary.dir_min[v]
                            : boundary.dir_max[v];
    const double c = std::clamp(std::abs(lobe.dot(target)), 0.0, 1.0);
    const double angle = std::acos(c) * 180.0 / kPi;
    angles.push_back(angle);
    report.entries.push_back({v, angle, pref});
  }
  report.median_deg = median(angles);
  report.p90_deg = percentile(angles, 0.9);
  report.feature_median_deg = median(feature_angles);
  return report;
}

}  // namespace odeco

// ---------------------------------------------------------------------------
// Analytic-patch oracles
// ---------------------------------------------------------------------------

#include "odeco/theory_oracles.hpp"

namespace odeco {

namespace {

Mat3 minimal_rotation(const Vec3& from, const Vec3& to) {
  const double c = from.dot(to);
  const Vec3 v = from.cross(to);
  if (c < -1.0 + 1e-12) return -Mat3::Identity();  // never hit for small steps
  Mat3 vx;
  vx << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return Mat3::Identity() + vx + vx * vx / (1.0 + c);
}

Vec15 frame_tensor(const Vec3& normal, const Vec3& t1, const Vec3& lambda) {
  Mat3 frame;
  frame.col(0) = t1;
  frame.col(1) = normal.cross(t1);
  frame.col(2) = normal;
  return rotation_operator(matrix_to_euler(frame)) * canonical_tensor(lambda);
}

/// Signed in-plane angle about `normal` from a to b.
double tangent_angle(const Vec3& a, const Vec3& b, const Vec3& normal) {
  return std::atan2(normal.dot(a.cross(b)), a.dot(b));
}

struct SurfaceField {
  // p(q): closest-point map onto the surface; n(p): unit normal;
  // t1(p): field tangent axis.
  std::function<Vec3(const Vec3&)> project;
  std::function<Vec3(const Vec3&)> normal;
  std::function<Vec3(const Vec3&)> tangent;
};

PatchOracleResult run_patch_oracle(const SurfaceField& surf, const Vec3& p0,
                                   const Vec3& lambda, double k_max,
                                   double k_min, double phi, double delta) {
  const Vec3 n0 = surf.normal(p0);
  const Vec3 t0 = surf.tangent(p0);
  const Vec3 e1 = t0;
  const Vec3 e2 = n0.cross(t0);

  auto field_at = [&](const Vec3& q) {
    const Vec3 p = surf.project(q);
    return frame_tensor(surf.normal(p), surf.tangent(p), lambda);
  };

  double fd_total = 0.0;
  double omega = 0.0;
  for (const Vec3& dir : {e1, e2}) {
    const Vec3 pp = surf.project(p0 + delta * dir);
    const Vec3 pm = surf.project(p0 - delta * dir);
    const Vec15 fp = field_at(pp);
    const Vec15 fm = field_at(pm);
    // arc-length correction: use the true geodesic-ish separation
    const double ds = (pp - pm).norm();
    fd_total += (fp - fm).squaredNorm() / (ds * ds);

    // twist rate: transport the frame from pm to pp and compare spins
    const Vec3 nm = surf.normal(pm), np = surf.normal(pp);
    const Mat3 transport = minimal_rotation(nm, np);
    const double spin =
        tangent_angle(transport * surf.tangent(pm), surf.tangent(pp), np);
    omega += (spin / ds) * (spin / ds);
  }

  PatchOracleResult out;
  out.fd_total = fd_total;
  out.omega = omega;
  out.phi = phi;
  const BoundaryEnergyPrediction pred =
      predicted_gradient_norm(lambda, phi, k_max, k_min, omega);
  out.predicted = pred.total;
  out.rel_err = std::abs(out.fd_total - out.predicted) /
                std::max(std::abs(out.predicted), 1e-12);
  return out;
}

}  // namespace

PatchOracleResult sphere_patch_gradient_check(const Vec3& lambda,
                                              double radius) {
  const Vec3 anchor = Vec3(1.0, 0.0, 0.0);  // projected reference axis
  SurfaceField surf;
  surf.project = [radius](const Vec3& q) { return radius * q.normalized(); };
  surf.normal = [](const Vec3& p) { return p.normalized(); };
  surf.tangent = [anchor](const Vec3& p) {
    const Vec3 n = p.normalized();
    return (anchor - anchor.dot(n) * n).normalized();
  };
  const Vec3 p0 = radius * Vec3(0.3, 0.45, 0.85).normalized();
  // umbilic: the curvature term is phi-independent
  return run_patch_oracle(surf, p0, lambda, 1.0 / radius, 1.0 / radius, 0.0,
                          1e-4 * radius);
}

PatchOracleResult cylinder_patch_gradient_check(const Vec3& lambda,
                                                double radius, double phi) {
  SurfaceField surf;
  surf.project = [radius](const Vec3& q) {
    const double rho = std::hypot(q.x(), q.y());
    return Vec3(radius * q.x() / rho, radius * q.y() / rho, q.z());
  };
  surf.normal = [](const Vec3& p) {
    return Vec3(p.x(), p.y(), 0.0).normalized();
  };
  // x-lobe at angle phi from the axis (the minimum-curvature direction),
  // rotated within the tangent plane
  surf.tangent = [phi](const Vec3& p) {
    const Vec3 n = Vec3(p.x(), p.y(), 0.0).normalized();
    const Vec3 axis(0, 0, 1);
    const Vec3 circ = n.cross(axis);  // tangential, orthogonal to axis
    return std::cos(phi) * axis + std::sin(phi) * circ;
  };
  const Vec3 p0(radius, 0.0, 0.25);
  return run_patch_oracle(surf, p0, lambda, 1.0 / radius, 0.0, phi,
                          1e-4 * radius);
}

double generator_norm_vs_g_factor(const Vec3& lambda) {
  const Vec15 f = canonical_tensor(lambda);
  const ShTables& t = tables();
  double worst = 0.0;
  worst = std::max(worst,
                   std::abs((t.Lx * f).squaredNorm() - g_factor(lambda, 1)));
  worst = std::max(worst,
                   std::abs((t.Ly * f).squaredNorm() - g_factor(lambda, 2)));
  worst = std::max(worst,
                   std::abs((t.Lz * f).squaredNorm() - g_factor(lambda, 3)));
  return worst;
}

}  // namespace odeco
