#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "odeco/solver.hpp"

namespace odeco {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Graph Laplacian from the cotangent weights (zero row sums).
SpMat cotan_laplacian(const TetMesh& mesh) {
  std::vector<Triplet> trip;
  trip.reserve(4 * mesh.edges.size());
  std::vector<double> diag(mesh.vertex_count(), 0.0);
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const int i = mesh.edges[e][0], j = mesh.edges[e][1];
    const double w = mesh.cotan_weights[e];
    trip.emplace_back(i, j, -w);
    trip.emplace_back(j, i, -w);
    diag[i] += w;
    diag[j] += w;
  }
  for (int v = 0; v < mesh.vertex_count(); ++v)
    trip.emplace_back(v, v, diag[v]);
  SpMat l(mesh.vertex_count(), mesh.vertex_count());
  l.setFromTriplets(trip.begin(), trip.end());
  return l;
}

}  // namespace

std::vector<Vec3> diffuse_lambda(const TetMesh& mesh,
                                 const std::map<int, Vec3>& targets,
                                 const std::array<std::vector<char>, 3>& active,
                                 const SolverConfig& config) {
  if (targets.empty())
    throw ValidationError("diffusion: at least one target vertex required");
  const int nv = mesh.vertex_count();
  const double h = mesh.mean_edge_length();
  const double t = config.diffusion_time * h * h;
  const SpMat lap = cotan_laplacian(mesh);

  std::vector<Vec3> out(nv, Vec3::Ones());

  // Each lambda component diffuses as an independent scalar with its own
  // pinned vertex set.
  for (int comp = 0; comp < 3; ++comp) {
    std::vector<int> pinned_of(nv, -1);
    std::vector<double> pin_value;
    std::vector<int> free_of(nv, -1);
    std::vector<int> free_ids;
    double target_lo = 1e300, target_hi = -1e300, target_sum = 0.0;
    for (const auto& [v, lambda] : targets) {
      if (!active[comp].empty() && !active[comp][v]) continue;
      pinned_of[v] = static_cast<int>(pin_value.size());
      pin_value.push_back(lambda[comp]);
      target_lo = std::min(target_lo, lambda[comp]);
      target_hi = std::max(target_hi, lambda[comp]);
      target_sum += lambda[comp];
    }
    if (pin_value.empty()) {
      for (int v = 0; v < nv; ++v) out[v][comp] = 1.0;  // neutral ratio
      continue;
    }
    for (int v = 0; v < nv; ++v) {
      if (pinned_of[v] < 0) {
        free_of[v] = static_cast<int>(free_ids.size());
        free_ids.push_back(v);
      }
    }
    const int nf = static_cast<int>(free_ids.size());
    if (nf == 0) {
      for (int v = 0; v < nv; ++v) out[v][comp] = pin_value[pinned_of[v]];
      continue;
    }

    // Reduced system A_ff = (M + t L)_ff; Dirichlet columns move to the rhs.
    std::vector<Triplet> trip;
    Eigen::VectorXd coupling = Eigen::VectorXd::Zero(nf);  // -A_fc * u_c
    for (int v = 0; v < nv; ++v) {
      if (free_of[v] < 0) continue;
      trip.emplace_back(free_of[v], free_of[v], mesh.lumped_mass[v]);
    }
    for (int k = 0; k < lap.outerSize(); ++k) {
      for (SpMat::InnerIterator it(lap, k); it; ++it) {
        const int r = static_cast<int>(it.row());
        const int c = static_cast<int>(it.col());
        if (free_of[r] < 0) continue;
        if (free_of[c] >= 0) {
          trip.emplace_back(free_of[r], free_of[c], t * it.value());
        } else {
          coupling[free_of[r]] -= t * it.value() * pin_value[pinned_of[c]];
        }
      }
    }
    SpMat a(nf, nf);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<SpMat> solver(a);
    if (solver.info() != Eigen::Success)
      throw SolverError("diffusion: singular system (disconnected mesh?)");

    // Implicit Euler steps u' = (M + tL)^{-1} (M u) with pinned rows, from
    // the target mean, iterated to stationarity. The fixed point is the
    // harmonic extension of the targets; every iterate stays inside the
    // target hull on meshes with nonnegative weights.
    Eigen::VectorXd u =
        Eigen::VectorXd::Constant(nf, target_sum / pin_value.size());
    const double scale = std::max(std::abs(target_lo), std::abs(target_hi));
    const double tol = 1e-12 * std::max(1.0, scale);
    for (int step = 0; step < config.diffusion_max_steps; ++step) {
      Eigen::VectorXd rhs = coupling;
      for (int i = 0; i < nf; ++i)
        rhs[i] += mesh.lumped_mass[free_ids[i]] * u[i];
      Eigen::VectorXd next = solver.solve(rhs);
      const double delta = (next - u).cwiseAbs().maxCoeff();
      u = std::move(next);
      if (delta < tol) break;
    }
    for (const auto& [v, lambda] : targets) {
      if (pinned_of[v] >= 0) out[v][comp] = lambda[comp];
    }
    for (int i = 0; i < nf; ++i) out[free_ids[i]][comp] = u[i];
  }
  return out;
}

}  // namespace odeco
