#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <sstream>

#include "odeco/archive.hpp"
#include "odeco/rng.hpp"

namespace odeco {

namespace {

Eigen::Vector4d barycentric(const TetMesh& mesh, int t, const Vec3& p) {
  const auto& tet = mesh.tets[t];
  Eigen::Matrix3d m;
  m.col(0) = mesh.vertices[tet[1]] - mesh.vertices[tet[0]];
  m.col(1) = mesh.vertices[tet[2]] - mesh.vertices[tet[0]];
  m.col(2) = mesh.vertices[tet[3]] - mesh.vertices[tet[0]];
  const Vec3 rhs = p - mesh.vertices[tet[0]];
  const Vec3 uvw = m.colPivHouseholderQr().solve(rhs);
  return {1.0 - uvw.sum(), uvw[0], uvw[1], uvw[2]};
}

}  // namespace

int PointLocator::locate(const Vec3& p, int hint_tet,
                         Eigen::Vector4d* bary_out) const {
  // Straight-line tet walk: hop across the face of the most negative
  // barycentric coordinate. Returns -1 once the walk exits the mesh.
  int t = hint_tet;
  const int cap = 4 * mesh->tet_count() + 16;
  for (int steps = 0; steps < cap; ++steps) {
    const Eigen::Vector4d bary = barycentric(*mesh, t, p);
    int worst = 0;
    bary.minCoeff(&worst);
    if (bary[worst] >= -1e-10) {
      if (bary_out) *bary_out = bary;
      return t;
    }
    // Opposite face of corner `worst` separates us from p.
    const int next = mesh->tet_neighbors[t][worst];
    if (next < 0) return -1;
    t = next;
  }
  return -1;
}

namespace {

struct DirectionField {
  const FieldArchive* archive;
  PointLocator locator;

  /// Major eigenvector of the barycentric-interpolated glyph matrix.
  /// Returns false on exit / degenerate spectrum.
  bool direction(const Vec3& p, int& tet_hint, const Vec3& prev,
                 double gap_tol, Vec3* out, bool* degenerate) const {
    Eigen::Vector4d bary;
    const int t = locator.locate(p, tet_hint, &bary);
    if (t < 0) return false;
    tet_hint = t;
    Mat3 m = Mat3::Zero();
    for (int k = 0; k < 4; ++k) {
      m += bary[k] * archive->glyph_matrices[archive->mesh.tets[t][k]];
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (m + m.transpose()));
    const double l0 = es.eigenvalues()[2];  // largest
    const double l1 = es.eigenvalues()[1];
    const double scale = std::max(std::abs(l0), 1e-300);
    if ((l0 - l1) / scale < gap_tol) {
      if (degenerate) *degenerate = true;
      return false;
    }
    Vec3 dir = es.eigenvectors().col(2);
    if (dir.dot(prev) < 0.0) dir = -dir;  // sign continuity
    *out = dir;
    return true;
  }
};

CurveSet::Stop trace_one_direction(const DirectionField& field,
                                   const Vec3& seed, int seed_tet,
                                   const Vec3& initial_dir, double step,
                                   int max_steps, double gap_tol,
                                   std::vector<Vec3>& points) {
  Vec3 p = seed;
  Vec3 prev = initial_dir;
  int tet_hint = seed_tet;
  for (int s = 0; s < max_steps; ++s) {
    // RK4 with per-stage sign continuity.
    bool degenerate = false;
    Vec3 k1, k2, k3, k4;
    int hint = tet_hint;
    if (!field.direction(p, hint, prev, gap_tol, &k1, &degenerate))
      return degenerate ? CurveSet::Stop::DegenerateDirection
                        : CurveSet::Stop::BoundaryExit;
    int h2 = hint;
    if (!field.direction(p + 0.5 * step * k1, h2, k1, gap_tol, &k2,
                         &degenerate))
      return degenerate ? CurveSet::Stop::DegenerateDirection
                        : CurveSet::Stop::BoundaryExit;
    int h3 = hint;
    if (!field.direction(p + 0.5 * step * k2, h3, k2, gap_tol, &k3,
                         &degenerate))
      return degenerate ? CurveSet::Stop::DegenerateDirection
                        : CurveSet::Stop::BoundaryExit;
    int h4 = hint;
    if (!field.direction(p + step * k3, h4, k3, gap_tol, &k4, &degenerate))
      return degenerate ? CurveSet::Stop::DegenerateDirection
                        : CurveSet::Stop::BoundaryExit;
    const Vec3 dir = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    const double n = dir.norm();
    if (n < 1e-12) return CurveSet::Stop::Stalled;
    const Vec3 next = p + step * (dir / n);
    int hint_next = tet_hint;
    if (field.locator.locate(next, hint_next, nullptr) < 0)
      return CurveSet::Stop::BoundaryExit;  // stop at the last inside point
    tet_hint = hint_next;
    prev = dir / n;
    p = next;
    points.push_back(p);
  }
  return CurveSet::Stop::StepCap;
}

}  // namespace

CurveSet trace_integral_curves(const FieldArchive& archive,
                               const TraceOptions& options) {
  const TetMesh& mesh = archive.mesh;
  const double step =
      options.step > 0.0 ? options.step : 0.5 * mesh.mean_edge_length();

  // Volume-weighted seed tets via a cumulative table.
  std::vector<double> cum(mesh.tet_count());
  double total = 0.0;
  for (int t = 0; t < mesh.tet_count(); ++t) {
    total += mesh.tet_volume(t);
    cum[t] = total;
  }
  const CounterRng rng(options.rng_seed);
  DirectionField field{&archive, PointLocator{&mesh}};

  CurveSet out;
  out.curves.resize(options.n_seeds);
  for (int s = 0; s < options.n_seeds; ++s) {
    const double pick =
        rng.uniform(rng_stream::kSeedPoints, pack_counter(0, s, 0)) * total;
    const int tet = static_cast<int>(
        std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin());
    // uniform barycentric sample by cube folding
    double a = rng.uniform(rng_stream::kSeedPoints, pack_counter(1, s, 0));
    double b = rng.uniform(rng_stream::kSeedPoints, pack_counter(1, s, 1));
    double c = rng.uniform(rng_stream::kSeedPoints, pack_counter(1, s, 2));
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    if (b + c > 1.0) {
      const double tmp = c;
      c = a + b + c - 1.0;
      b = 1.0 - tmp;
    } else if (a + b + c > 1.0) {
      const double tmp = c;
      c = a + b + c - 1.0;
      a = 1.0 - b - tmp;
    }
    const auto& tv = mesh.tets[std::min(tet, mesh.tet_count() - 1)];
    const Vec3 seed = (1.0 - a - b - c) * mesh.vertices[tv[0]] +
                      a * mesh.vertices[tv[1]] + b * mesh.vertices[tv[2]] +
                      c * mesh.vertices[tv[3]];

    CurveSet::Curve& curve = out.curves[s];
    curve.seed = seed;
    const int seed_tet = std::min(tet, mesh.tet_count() - 1);
    Vec3 dir0;
    bool degenerate = false;
    int hint = seed_tet;
    if (!field.direction(seed, hint, Vec3(1, 0, 0), options.eigen_gap_tol,
                         &dir0, &degenerate)) {
      curve.points.push_back(seed);
      curve.forward_stop = curve.backward_stop =
          degenerate ? CurveSet::Stop::DegenerateDirection
                     : CurveSet::Stop::BoundaryExit;
      continue;
    }
    std::vector<Vec3> forward, backward;
    curve.forward_stop =
        trace_one_direction(field, seed, seed_tet, dir0, step,
                            options.max_steps, options.eigen_gap_tol, forward);
    curve.backward_stop = trace_one_direction(
        field, seed, seed_tet, -dir0, step, options.max_steps,
        options.eigen_gap_tol, backward);
    curve.points.reserve(forward.size() + backward.size() + 1);
    for (auto it = backward.rbegin(); it != backward.rend(); ++it)
      curve.points.push_back(*it);
    curve.points.push_back(seed);
    for (const Vec3& p : forward) curve.points.push_back(p);
  }
  return out;
}

void write_curves_obj(const std::string& path, const CurveSet& curves) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write curves: " + path);
  out.precision(12);
  long base = 1;
  for (const auto& c : curves.curves) {
    for (const Vec3& p : c.points) {
      out << "v " << p.x() << " " << p.y() << " " << p.z() << "\n";
    }
    if (c.points.size() >= 2) {
      out << "l";
      for (std::size_t i = 0; i < c.points.size(); ++i) out << " " << base + i;
      out << "\n";
    }
    base += static_cast<long>(c.points.size());
  }
  if (!out) throw IoError("short write: " + path);
}

}  // namespace odeco
