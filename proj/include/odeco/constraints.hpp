#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "odeco/algebra.hpp"
#include "odeco/mesh.hpp"
#include "odeco/types.hpp"

namespace odeco {

enum class Mode { Design, Smooth };
enum class ValueMap { Identity, LogClamp };

/// Per-vertex guidance, normalized from the file format / generators.
/// A vertex appears in at most one of soft_lambda / hard_lambda /
/// hard_tensor; all guided lambda values are positive.
struct ConstraintSet {
  struct SoftLambda {
    Vec3 target = Vec3::Ones();
    double weight = 1.0;
    std::array<bool, 3> active{true, true, true};  // per-component penalty
  };

  std::map<int, SoftLambda> soft_lambda;
  std::map<int, Vec3> hard_lambda;
  std::map<int, std::pair<Vec3, Vec3>> hard_tensor;  // (theta, lambda)
  std::vector<int> corner_overrides;

  bool lock_boundary = true;  // normal alignment on every boundary vertex
  bool lock_features = true;  // strict feature alignment

  bool has_lambda_targets() const {
    return !soft_lambda.empty() || !hard_lambda.empty();
  }
};

/// Parses the JSON guidance file (see README for the schema). Rejects
/// out-of-range vertices, non-positive lambda and conflicting sections.
/// An empty file yields the default ConstraintSet.
ConstraintSet parse_guidance(const std::string& path, int vertex_count);

/// Serializes back to the same schema (used for reports and idempotence).
std::string serialize_guidance(const ConstraintSet& c);

/// Curvature-based guidance on every boundary vertex:
///   lambda_x = clamp(|K_max / K_min|, lo, hi)   (ratio -> hi as K_min -> 0)
///   lambda_y = 1, lambda_z free.
/// With pin_lambda_z set, lambda_z is penalized toward the given value,
/// nudged off the degenerate surface lambda_z = (5/6)(lambda_x + lambda_y).
void add_curvature_guidance(ConstraintSet& constraints, const TetMesh& mesh,
                            const BoundaryData& boundary, double clamp_lo,
                            double clamp_hi, const double* pin_lambda_z = nullptr);

/// Initialization (and fidelity reference) derived from a raw symmetric
/// tensor field.
struct FieldGuidance {
  std::vector<Vec3> theta;
  std::vector<Vec3> lambda;
  std::vector<Vec15> reference;  // realized tensors of the mapped field
};

FieldGuidance field_guidance(const TetMesh& mesh,
                             const std::vector<Mat3>& raw_field,
                             ValueMap value_map);

}  // namespace odeco
