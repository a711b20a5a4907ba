#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "odeco/types.hpp"

namespace odeco {

enum class MeshFormat { TetgenNodeEle, VtkLegacy };

/// Tetrahedral mesh with the derived quantities the energy needs. All
/// fields are immutable after build_topology(); sharing read-only across
/// threads is safe.
struct TetMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;          // positively oriented
  std::vector<std::array<int, 2>> edges;         // unique, v0 < v1
  std::vector<std::array<int, 3>> boundary_faces;  // outward oriented
  std::vector<char> boundary_flag;               // per vertex
  std::vector<double> cotan_weights;             // per edge, symmetric
  std::vector<double> lumped_mass;               // per vertex (volume units)

  // adjacency used by diffusion, feature detection and tracing
  std::vector<std::vector<int>> vertex_edge_ids;  // per vertex
  std::vector<std::array<int, 4>> tet_neighbors;  // across face opp. corner k; -1 = boundary

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int tet_count() const { return static_cast<int>(tets.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  int other_endpoint(int edge_id, int v) const {
    const auto& e = edges[edge_id];
    return e[0] == v ? e[1] : e[0];
  }

  double mean_edge_length() const;
  double tet_volume(int t) const;
};

/// Per-boundary-vertex geometry. Interior vertices keep zero entries.
struct BoundaryData {
  std::vector<Vec3> normals;        // unit for boundary vertices
  std::vector<double> k_max, k_min;
  std::vector<Vec3> dir_max, dir_min;  // principal directions (mu, nu)
  std::vector<char> curvature_warning;  // under-determined fit fallback
  std::vector<char> curvature_valid;

  std::vector<int> feature_edges;      // edge ids
  std::vector<char> edge_is_feature;   // per edge
  std::vector<char> vertex_on_feature; // per vertex
  std::vector<Vec3> feature_tangents;  // unit, for feature vertices
  std::vector<int> corners;            // vertex ids
  std::vector<char> is_corner;         // per vertex
};

TetMesh load_tet_mesh(const std::string& path, MeshFormat format);

/// Builds derived topology and weights; called by the loaders and by the
/// synthetic mesh builders. Throws ValidationError for dangling indices,
/// zero-volume tets and non-manifold boundary edges.
void build_topology(TetMesh& mesh);

/// Clamp for individual per-tet cotangent contributions on degenerate
/// dihedral angles.
inline constexpr double kCotanClamp = 20.0;

/// Angle-weighted boundary vertex normals. Requires build_topology.
BoundaryData build_boundary(const TetMesh& mesh);

/// Marks boundary edges whose face pair bends more than the threshold,
/// assigns sign-consistent feature tangents, and collects corners
/// (>= 3 incident feature edges, plus explicit overrides).
void detect_features(const TetMesh& mesh, BoundaryData& boundary,
                     double dihedral_threshold_deg,
                     const std::vector<int>& corner_overrides = {});

/// 2-ring quadric fit per boundary vertex (3-ring fallback, then zero with
/// a warning flag). Fills k_max/k_min and orthonormal principal directions.
void estimate_curvature(const TetMesh& mesh, BoundaryData& boundary);

/// Writers used by the CLI and the archive layer.
void write_vtk_mesh_header(std::string& out, const TetMesh& mesh,
                           const std::string& title);

}  // namespace odeco
