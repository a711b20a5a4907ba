#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "odeco/algebra.hpp"
#include "odeco/constraints.hpp"
#include "odeco/mesh.hpp"

namespace odeco {

enum class VertexClass : std::uint8_t {
  Interior = 0,
  Boundary = 1,
  FeatureEdge = 2,
  Corner = 3,
  HardFixed = 4
};

const char* vertex_class_name(VertexClass c);

/// Per-vertex degrees of freedom. theta slot usage by class:
/// Interior uses all three Euler angles, Boundary/FeatureEdge only the
/// z-spin (stored in theta.z()), Corner and HardFixed none.
struct VertexFrame {
  VertexClass cls = VertexClass::Interior;
  Vec3 theta = Vec3::Zero();
  Vec3 lambda = Vec3::Ones();
  bool lambda_fixed = false;
};

/// The whole field plus cached per-vertex rotations for locked classes.
struct FrameField {
  std::vector<VertexFrame> frames;
  std::vector<Vec3> axis;            // normal / feature tangent, zero if unused
  std::vector<Mat15> axis_rotation;  // cached coefficient rotation
  std::vector<Vec15> fixed_tensor;   // realized tensor for HardFixed vertices

  int vertex_count() const { return static_cast<int>(frames.size()); }

  /// Realized odeco tensor of one vertex.
  Vec15 realize_vertex(int v) const;

  /// 3x3 frame whose columns carry the lambda axes (for glyphs/reports).
  Mat3 frame3(int v) const;
};

/// Classifies vertices (HardFixed > Corner > FeatureEdge > Boundary >
/// Interior, honoring the lock flags), caches axis rotations, applies hard
/// lambda constraints, and realizes hard tensors.
FrameField make_frame_field(const TetMesh& mesh, const BoundaryData& boundary,
                            const ConstraintSet& constraints);

/// Which parameters a solve exposes.
enum class DofScope { All, ThetaOnly };

/// Flat parameter layout: vertices ascending, theta slots before lambda
/// slots. pack/unpack are exact inverses.
struct ParamLayout {
  std::vector<int> offset;               // per vertex
  std::vector<std::uint8_t> theta_dof;   // 0, 1 or 3
  std::vector<std::uint8_t> lambda_dof;  // 0 or 3
  int total = 0;

  static ParamLayout build(const FrameField& field, DofScope scope);
};

void pack_params(const FrameField& field, const ParamLayout& layout,
                 std::vector<double>& x);
void unpack_params(FrameField& field, const ParamLayout& layout,
                   std::span<const double> x);

struct EnergyBreakdown {
  double total = 0.0;
  double smoothness = 0.0;
  double penalty = 0.0;  // E_lambda (design) or E_dis (smooth)
  double weight = 1.0;   // psi or kappa
  Mode mode = Mode::Design;
  std::vector<double> per_vertex_smoothness;
};

/// Objective with analytic gradient for one (mesh, field, constraints,
/// mode) instance. Evaluation is a pure function of the parameter vector;
/// per-vertex work runs as a fixed-chunk parallel map and edge terms reduce
/// in index order, so results are bitwise reproducible.
class EnergyModel {
 public:
  EnergyModel(const TetMesh& mesh, FrameField& field,
              const ConstraintSet& constraints, Mode mode, double weight,
              DofScope scope = DofScope::All,
              const std::vector<Vec15>* reference = nullptr);

  const ParamLayout& layout() const { return layout_; }
  FrameField& field() { return *field_; }
  const TetMesh& mesh() const { return *mesh_; }

  std::vector<double> pack() const;
  void unpack(std::span<const double> x);

  /// Writes frames from x, then evaluates; grad (optional) must have
  /// layout().total entries.
  EnergyBreakdown evaluate(std::span<const double> x,
                           std::vector<double>* grad);

  /// Evaluates at the current frame state without touching parameters.
  EnergyBreakdown evaluate_current(std::vector<double>* grad = nullptr);

  /// Clamps lambda parameters in x to the positivity floor.
  void project_lambda(std::vector<double>& x, double floor) const;

 private:
  const TetMesh* mesh_;
  FrameField* field_;
  const ConstraintSet* constraints_;
  Mode mode_;
  double weight_;
  DofScope scope_;
  const std::vector<Vec15>* reference_;
  ParamLayout layout_;

  // scratch, sized once
  Eigen::Matrix<double, Eigen::Dynamic, kCoeffCount, Eigen::RowMajor> coeffs_;
  Eigen::Matrix<double, Eigen::Dynamic, kCoeffCount, Eigen::RowMajor> cograd_;
  std::vector<Eigen::Matrix<double, kCoeffCount, 6>> jacobians_;
  std::vector<std::int32_t> edge_a_, edge_b_;
  std::vector<double> edge_w_;
};

/// Standalone energies (brute-force friendly signatures used by tests and
/// reports; EnergyModel is the hot path).
std::pair<double, std::vector<double>> smoothness_energy(
    const TetMesh& mesh, const std::vector<Vec15>& coeffs);
double guidance_energy(const FrameField& field,
                       const ConstraintSet& constraints);
double distortion_energy(const std::vector<Vec15>& coeffs,
                         const std::vector<Vec15>& reference);

/// Deterministic fixed-chunk parallel map used for per-vertex work.
/// Thread count: ODECO_THREADS env or hardware concurrency.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace odeco
