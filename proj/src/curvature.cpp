#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "odeco/algebra.hpp"
#include "odeco/mesh.hpp"

namespace odeco {

namespace {

// Boundary-vertex adjacency from boundary faces.
std::vector<std::vector<int>> boundary_adjacency(const TetMesh& mesh) {
  std::vector<std::set<int>> adj(mesh.vertex_count());
  for (const auto& f : mesh.boundary_faces) {
    for (int k = 0; k < 3; ++k) {
      adj[f[k]].insert(f[(k + 1) % 3]);
      adj[f[k]].insert(f[(k + 2) % 3]);
    }
  }
  std::vector<std::vector<int>> out(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v)
    out[v].assign(adj[v].begin(), adj[v].end());
  return out;
}

std::vector<int> ring_neighbors(const std::vector<std::vector<int>>& adj,
                                int v, int rings) {
  std::set<int> seen{v};
  std::vector<int> frontier{v};
  for (int r = 0; r < rings; ++r) {
    std::vector<int> next;
    for (int u : frontier) {
      for (int w : adj[u]) {
        if (seen.insert(w).second) next.push_back(w);
      }
    }
    frontier = std::move(next);
  }
  seen.erase(v);
  return {seen.begin(), seen.end()};
}

struct QuadricFit {
  bool ok = false;
  double k_max = 0.0, k_min = 0.0;
  Vec3 dir_max = Vec3::Zero(), dir_min = Vec3::Zero();
};

// Fit h(u,v) = a u^2 + b uv + c v^2 + d u + e v over neighbors expressed in
// the tangent frame; principal curvatures from the Weingarten map with the
// first-fundamental-form correction for the fitted slope.
QuadricFit fit_quadric(const TetMesh& mesh, const Vec3& normal, int v,
                       const std::vector<int>& neighbors) {
  QuadricFit out;
  if (neighbors.size() < 5) return out;
  const Mat3 frame = axis_frame(normal);  // columns: t1, t2, n
  const Vec3 t1 = frame.col(0), t2 = frame.col(1);
  const Vec3& origin = mesh.vertices[v];

  Eigen::MatrixXd a(neighbors.size(), 5);
  Eigen::VectorXd rhs(neighbors.size());
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const Vec3 d = mesh.vertices[neighbors[i]] - origin;
    const double u = d.dot(t1), w = d.dot(t2), h = d.dot(normal);
    a(i, 0) = u * u;
    a(i, 1) = u * w;
    a(i, 2) = w * w;
    a(i, 3) = u;
    a(i, 4) = w;
    rhs[i] = h;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.rank() < 5) return out;
  const Eigen::VectorXd x = svd.solve(rhs);

  const double du = x[3], dv = x[4];
  const double inv_len = 1.0 / std::sqrt(1.0 + du * du + dv * dv);
  Eigen::Matrix2d second;
  second << 2.0 * x[0], x[1], x[1], 2.0 * x[2];
  second *= inv_len;
  Eigen::Matrix2d first;
  first << 1.0 + du * du, du * dv, du * dv, 1.0 + dv * dv;
  // Sign: neighbors of a convex (sphere-like, outward normal) patch sit
  // below the tangent plane, so flip to make the sphere positive.
  const Eigen::Matrix2d weingarten = -first.inverse() * second;
  const Eigen::EigenSolver<Eigen::Matrix2d> es(weingarten);
  double k0 = es.eigenvalues()[0].real();
  double k1 = es.eigenvalues()[1].real();
  Eigen::Vector2d e0 = es.eigenvectors().col(0).real();
  Eigen::Vector2d e1 = es.eigenvectors().col(1).real();
  if (k0 < k1) {
    std::swap(k0, k1);
    std::swap(e0, e1);
  }
  out.ok = true;
  out.k_max = k0;
  out.k_min = k1;
  // Lift to 3D and orthonormalize against the vertex normal.
  Vec3 d0 = (e0[0] * t1 + e0[1] * t2);
  d0 -= d0.dot(normal) * normal;
  if (d0.norm() < 1e-12) d0 = t1;
  d0.normalize();
  Vec3 d1 = normal.cross(d0);
  out.dir_max = d0;
  out.dir_min = d1;
  return out;
}

}  // namespace

void estimate_curvature(const TetMesh& mesh, BoundaryData& b) {
  const auto adj = boundary_adjacency(mesh);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!mesh.boundary_flag[v]) continue;
    QuadricFit fit =
        fit_quadric(mesh, b.normals[v], v, ring_neighbors(adj, v, 2));
    if (!fit.ok) {
      fit = fit_quadric(mesh, b.normals[v], v, ring_neighbors(adj, v, 3));
      b.curvature_warning[v] = 1;
    }
    if (!fit.ok) {
      // Fall back to zero curvature; directions from the tangent frame.
      const Mat3 frame = axis_frame(b.normals[v]);
      b.k_max[v] = 0.0;
      b.k_min[v] = 0.0;
      b.dir_max[v] = frame.col(0);
      b.dir_min[v] = frame.col(1);
      b.curvature_warning[v] = 1;
      b.curvature_valid[v] = 1;
      continue;
    }
    b.k_max[v] = fit.k_max;
    b.k_min[v] = fit.k_min;
    b.dir_max[v] = fit.dir_max;
    b.dir_min[v] = fit.dir_min;
    b.curvature_valid[v] = 1;
  }
}

}  // namespace odeco
