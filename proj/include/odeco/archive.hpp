#pragma once

#include <optional>
#include <string>
#include <vector>

#include "odeco/constraints.hpp"
#include "odeco/energy.hpp"
#include "odeco/mesh.hpp"
#include "odeco/solver.hpp"

namespace odeco {

/// On-disk field archive: <prefix>.vtk (mesh + per-vertex arrays) and
/// <prefix>.json (energies, config echo, constraints echo). The realized
/// coefficients regenerate bit-compatibly from (theta, lambda, class, axis)
/// on reload.
struct FieldArchive {
  TetMesh mesh;
  FrameField field;
  ConstraintSet constraints;
  Mode mode = Mode::Design;
  double weight = 50.0;
  EnergyBreakdown energy;
  std::vector<Vec15> stored_coeffs;   // as written / as read
  std::vector<Mat3> glyph_matrices;   // frame * diag(lambda) * frame^T
};

void save_archive(const std::string& prefix, const TetMesh& mesh,
                  const FrameField& field, const ConstraintSet& constraints,
                  Mode mode, double weight, const SolverReport& report,
                  const SolverConfig& config);

FieldArchive load_archive(const std::string& prefix);

/// Reads a per-vertex symmetric 3x3 field from a VTK legacy file
/// (POINT_DATA TENSORS block); vertex count must match the mesh.
std::vector<Mat3> read_vtk_tensor_field(const std::string& path,
                                        int expected_vertices);

/// Writes a symmetric tensor field as a VTK file on the given mesh.
void write_vtk_tensor_field(const std::string& path, const TetMesh& mesh,
                            const std::vector<Mat3>& field);

/// Integral curves of the major-lobe direction field.
struct CurveSet {
  enum class Stop { BoundaryExit, StepCap, DegenerateDirection, Stalled };
  struct Curve {
    std::vector<Vec3> points;
    Vec3 seed = Vec3::Zero();
    Stop forward_stop = Stop::StepCap;
    Stop backward_stop = Stop::StepCap;
  };
  std::vector<Curve> curves;
};

struct TraceOptions {
  int n_seeds = 32;
  double step = 0.0;   // 0: 0.5 * mean edge length
  int max_steps = 400;
  std::uint64_t rng_seed = 0;
  double eigen_gap_tol = 1e-6;
};

CurveSet trace_integral_curves(const FieldArchive& archive,
                               const TraceOptions& options);

void write_curves_obj(const std::string& path, const CurveSet& curves);

/// Oriented scaled glyph primitives, one per subsampled vertex, written as
/// OBJ. Each glyph is uniformly rescaled so its longest semi-axis equals
/// `display_size` (stretching ratios preserved).
enum class GlyphStyle { Cuboid, Ellipsoid };

struct GlyphOptions {
  int subsample = 1;   // every k-th vertex
  GlyphStyle style = GlyphStyle::Cuboid;
  double display_size = 0.0;  // 0: 0.4 * mean edge length
};

void export_glyphs(const std::string& path, const FieldArchive& archive,
                   const GlyphOptions& options);

/// Barycentric point location by tet walking (exposed for tests).
struct PointLocator {
  const TetMesh* mesh = nullptr;
  int locate(const Vec3& p, int hint_tet, Eigen::Vector4d* bary) const;
};

}  // namespace odeco
