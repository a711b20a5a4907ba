#pragma once

#include <vector>

#include "odeco/energy.hpp"
#include "odeco/mesh.hpp"
#include "odeco/types.hpp"

namespace odeco {

/// Stretch-dependent factors of the boundary gradient-norm decomposition:
/// g_k = (64 pi / 315) (4 (l_m - l_n)^2 + (l_m + l_n)^2) over the axis
/// pairs {y,z}, {x,z}, {x,y} for k = 1, 2, 3.
double g_factor(const Vec3& lambda, int k);

struct BoundaryEnergyPrediction {
  double curvature_term = 0.0;
  double twist_term = 0.0;
  double total = 0.0;
  double g1 = 0.0, g2 = 0.0, g3 = 0.0;
  // inputs echoed
  Vec3 lambda = Vec3::Ones();
  double phi = 0.0, k_max = 0.0, k_min = 0.0, omega = 0.0;
};

/// Predicted |grad f|^2 of a normal-aligned tensor on a smooth surface:
///   (cos^2 g1 + sin^2 g2) K_max^2 + (sin^2 g1 + cos^2 g2) K_min^2 + g3 w.
BoundaryEnergyPrediction predicted_gradient_norm(const Vec3& lambda,
                                                 double phi, double k_max,
                                                 double k_min, double omega);

enum class CurvatureAlignment {
  AlignLargeLobeToMinCurv,
  AlignLargeLobeToMaxCurv,
  NoPreference
};

/// Classification of the optimal tangential lobe placement: with unequal
/// tangential stretches the larger lobe prefers the minimum-curvature
/// direction iff lambda_z < (5/6)(lambda_x + lambda_y); equality (1e-9) in
/// either condition gives NoPreference.
CurvatureAlignment curvature_alignment_predicate(const Vec3& lambda);

const char* curvature_alignment_name(CurvatureAlignment a);

/// Two normal-aligned tensors on half-planes meeting at a dihedral angle;
/// the grid scans both in-plane angles of the major tangential lobe away
/// from the shared edge and records ||f1 - f2||^2.
struct PairEnergyScan {
  int grid_n = 0;
  std::vector<double> energy;  // row-major [phi1][phi2]
  double phi_step = 0.0;       // grid covers [0, pi)
  int argmin_i = 0, argmin_j = 0;

  double at(int i, int j) const { return energy[i * grid_n + j]; }
};

PairEnergyScan pair_energy_scan(const Vec3& lambda, double dihedral_delta,
                                int grid_n);

/// Angle statistics between realized major tangential lobes and the
/// preferred principal direction (plus feature-vertex lobes vs. tangents).
struct ConformityReport {
  struct Entry {
    int vertex = 0;
    double angle_deg = 0.0;
    CurvatureAlignment preference = CurvatureAlignment::NoPreference;
  };
  std::vector<Entry> entries;          // curvature-aligned boundary vertices
  std::vector<Entry> feature_entries;  // feature vertices vs. tangents
  double median_deg = 0.0;
  double p90_deg = 0.0;
  double feature_median_deg = 0.0;
  int skipped_no_preference = 0;
  int skipped_noise_floor = 0;
};

ConformityReport boundary_conformity_report(const TetMesh& mesh,
                                            const BoundaryData& boundary,
                                            const FrameField& field);

}  // namespace odeco
