#include <cmath>
#include <fstream>
#include <map>

#include "odeco/archive.hpp"

namespace odeco {

namespace {

struct Primitive {
  std::vector<Vec3> vertices;   // unit shape
  std::vector<std::array<int, 3>> faces;
};

Primitive unit_cuboid() {
  Primitive p;
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2)
      for (int sz = -1; sz <= 1; sz += 2)
        p.vertices.emplace_back(sx, sy, sz);
  // index = 4*(x>0) + 2*(y>0) + (z>0)
  const int quads[6][4] = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1},
                           {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3}};
  for (const auto& q : quads) {
    p.faces.push_back({q[0], q[1], q[2]});
    p.faces.push_back({q[0], q[2], q[3]});
  }
  return p;
}

Primitive unit_ellipsoid() {
  // icosahedron subdivided once, projected to the unit sphere
  Primitive p;
  const double t = 0.5 * (1.0 + std::sqrt(5.0));
  const double base[12][3] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                              {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                              {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (const auto& v : base)
    p.vertices.push_back(Vec3(v[0], v[1], v[2]).normalized());
  const int tri[20][3] = {{0, 11, 5},  {0, 5, 1},   {0, 1, 7},  {0, 7, 10},
                          {0, 10, 11}, {1, 5, 9},   {5, 11, 4}, {11, 10, 2},
                          {10, 7, 6},  {7, 1, 8},   {3, 9, 4},  {3, 4, 2},
                          {3, 2, 6},   {3, 6, 8},   {3, 8, 9},  {4, 9, 5},
                          {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    const auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(p.vertices.size());
    p.vertices.push_back((p.vertices[a] + p.vertices[b]).normalized());
    midpoint.emplace(key, id);
    return id;
  };
  for (const auto& f : tri) {
    const int m01 = mid(f[0], f[1]);
    const int m12 = mid(f[1], f[2]);
    const int m20 = mid(f[2], f[0]);
    p.faces.push_back({f[0], m01, m20});
    p.faces.push_back({f[1], m12, m01});
    p.faces.push_back({f[2], m20, m12});
    p.faces.push_back({m01, m12, m20});
  }
  return p;
}

}  // namespace

void export_glyphs(const std::string& path, const FieldArchive& archive,
                   const GlyphOptions& options) {
  if (options.subsample < 1)
    throw ValidationError("glyphs: subsample must be >= 1");
  const TetMesh& mesh = archive.mesh;
  const double display = options.display_size > 0.0
                             ? options.display_size
                             : 0.4 * mesh.mean_edge_length();
  const Primitive prim = (options.style == GlyphStyle::Cuboid)
                             ? unit_cuboid()
                             : unit_ellipsoid();

  std::ofstream out(path);
  if (!out) throw IoError("cannot write glyphs: " + path);
  out.precision(12);
  long base = 1;
  for (int v = 0; v < mesh.vertex_count(); v += options.subsample) {
    const Vec3 lambda = archive.field.frames[v].lambda;
    const double lmax = std::max(lambda.cwiseAbs().maxCoeff(), 1e-12);
    // uniform per-glyph rescale: longest semi-axis == display size,
    // stretching ratios preserved
    const Vec3 semi = lambda * (display / lmax);
    const Mat3 frame = archive.field.frame3(v);
    const Mat3 xform = frame * semi.asDiagonal();
    for (const Vec3& q : prim.vertices) {
      const Vec3 world = mesh.vertices[v] + xform * q;
      out << "v " << world.x() << " " << world.y() << " " << world.z() << "\n";
    }
    for (const auto& f : prim.faces) {
      out << "f " << base + f[0] << " " << base + f[1] << " " << base + f[2]
          << "\n";
    }
    base += static_cast<long>(prim.vertices.size());
  }
  if (!out) throw IoError("short write: " + path);
}

}  // namespace odeco
