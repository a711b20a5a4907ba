#include "odeco/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace odeco {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c,
                     const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

[[noreturn]] void parse_fail(const std::string& path, int line,
                             const std::string& what) {
  throw IoError(path + ":" + std::to_string(line) + ": " + what);
}

// Reads the next non-comment, non-empty line; returns false at EOF.
bool next_data_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto pos = line.find('#');
    if (pos != std::string::npos) line.erase(pos);
    if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
  }
  return false;
}

struct FaceKey {
  std::array<int, 3> sorted;
  bool operator<(const FaceKey& o) const { return sorted < o.sorted; }
};

FaceKey face_key(int a, int b, int c) {
  std::array<int, 3> s{a, b, c};
  std::sort(s.begin(), s.end());
  return FaceKey{s};
}

// Faces of a positively oriented tet {v0,v1,v2,v3}, each wound so its
// normal points out of the tet.
constexpr int kTetFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

}  // namespace

double TetMesh::mean_edge_length() const {
  if (edges.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : edges) sum += (vertices[e[0]] - vertices[e[1]]).norm();
  return sum / static_cast<double>(edges.size());
}

double TetMesh::tet_volume(int t) const {
  const auto& tet = tets[t];
  return signed_volume(vertices[tet[0]], vertices[tet[1]], vertices[tet[2]],
                       vertices[tet[3]]);
}

namespace {

TetMesh load_tetgen(const std::string& node_path) {
  std::string ele_path = node_path;
  if (ele_path.size() > 5 && ele_path.substr(ele_path.size() - 5) == ".node") {
    ele_path = ele_path.substr(0, ele_path.size() - 5) + ".ele";
  } else {
    ele_path += ".ele";
  }

  TetMesh mesh;
  long base = 1;  // TetGen defaults to 1-based; the .node first index decides
  {
    std::ifstream in(node_path);
    if (!in) throw IoError("cannot open mesh file: " + node_path);
    std::string line;
    int line_no = 0;
    if (!next_data_line(in, line, line_no))
      parse_fail(node_path, line_no, "missing .node header");
    std::istringstream head(line);
    long n = 0;
    int dim = 0;
    if (!(head >> n >> dim) || n <= 0 || dim != 3)
      parse_fail(node_path, line_no, "bad .node header (expect '<n> 3 ...')");
    mesh.vertices.reserve(n);
    for (long i = 0; i < n; ++i) {
      if (!next_data_line(in, line, line_no))
        parse_fail(node_path, line_no, "unexpected end of .node file");
      std::istringstream ls(line);
      long idx;
      double x, y, z;
      if (!(ls >> idx >> x >> y >> z))
        parse_fail(node_path, line_no, "bad vertex line");
      if (i == 0) {
        if (idx != 0 && idx != 1)
          parse_fail(node_path, line_no, "vertex indices must start at 0 or 1");
        base = idx;
      }
      mesh.vertices.emplace_back(x, y, z);
    }
  }
  {
    std::ifstream in(ele_path);
    if (!in) throw IoError("cannot open mesh file: " + ele_path);
    std::string line;
    int line_no = 0;
    if (!next_data_line(in, line, line_no))
      parse_fail(ele_path, line_no, "missing .ele header");
    std::istringstream head(line);
    long n = 0;
    int per = 0;
    if (!(head >> n >> per) || n <= 0 || per != 4)
      parse_fail(ele_path, line_no, "bad .ele header (expect '<n> 4 ...')");
    mesh.tets.reserve(n);
    const long nv = static_cast<long>(mesh.vertices.size());
    for (long i = 0; i < n; ++i) {
      if (!next_data_line(in, line, line_no))
        parse_fail(ele_path, line_no, "unexpected end of .ele file");
      std::istringstream ls(line);
      long idx;
      std::array<long, 4> t;
      if (!(ls >> idx >> t[0] >> t[1] >> t[2] >> t[3]))
        parse_fail(ele_path, line_no, "bad tetrahedron line");
      std::array<int, 4> tet;
      for (int k = 0; k < 4; ++k) {
        const long v = t[k] - base;
        if (v < 0 || v >= nv)
          parse_fail(ele_path, line_no,
                     "vertex index " + std::to_string(t[k]) +
                         " out of range (mesh has " + std::to_string(nv) +
                         " vertices)");
        tet[k] = static_cast<int>(v);
      }
      mesh.tets.push_back(tet);
    }
  }
  return mesh;
}

TetMesh load_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path);
  TetMesh mesh;
  std::string token;
  int line_no = 0;
  std::string line;
  long n_points = -1;
  std::vector<long> cell_data;
  std::vector<int> cell_types;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "POINTS") {
      if (!(ls >> n_points) || n_points < 0)
        parse_fail(path, line_no, "bad POINTS count");
      mesh.vertices.reserve(n_points);
      double x, y, z;
      while (static_cast<long>(mesh.vertices.size()) < n_points && in >> x >> y >> z) {
        mesh.vertices.emplace_back(x, y, z);
      }
      if (static_cast<long>(mesh.vertices.size()) != n_points)
        parse_fail(path, line_no, "truncated POINTS block");
    } else if (key == "CELLS") {
      long n_cells = 0, total = 0;
      if (!(ls >> n_cells >> total))
        parse_fail(path, line_no, "bad CELLS header");
      cell_data.reserve(total);
      long v;
      for (long i = 0; i < total; ++i) {
        if (!(in >> v)) parse_fail(path, line_no, "truncated CELLS block");
        cell_data.push_back(v);
      }
    } else if (key == "CELL_TYPES") {
      long n_types = 0;
      if (!(ls >> n_types)) parse_fail(path, line_no, "bad CELL_TYPES header");
      int t;
      for (long i = 0; i < n_types; ++i) {
        if (!(in >> t)) parse_fail(path, line_no, "truncated CELL_TYPES");
        cell_types.push_back(t);
      }
    }
  }
  if (mesh.vertices.empty()) throw IoError(path + ": no POINTS block found");
  // Walk the packed cell list, keeping VTK_TETRA (type 10) cells.
  std::size_t cursor = 0;
  std::size_t cell_idx = 0;
  while (cursor < cell_data.size()) {
    const long count = cell_data[cursor++];
    if (cursor + count > cell_data.size())
      throw IoError(path + ": malformed CELLS block");
    const bool is_tet =
        (cell_idx < cell_types.size()) ? (cell_types[cell_idx] == 10)
                                       : (count == 4);
    if (is_tet) {
      if (count != 4) throw IoError(path + ": tetra cell without 4 vertices");
      std::array<int, 4> tet;
      for (int k = 0; k < 4; ++k) {
        const long v = cell_data[cursor + k];
        if (v < 0 || v >= static_cast<long>(mesh.vertices.size()))
          throw IoError(path + ": vertex index " + std::to_string(v) +
                        " out of range in cell " + std::to_string(cell_idx));
        tet[k] = static_cast<int>(v);
      }
      mesh.tets.push_back(tet);
    }
    cursor += count;
    ++cell_idx;
  }
  if (mesh.tets.empty()) throw IoError(path + ": no tetrahedral cells found");
  return mesh;
}

}  // namespace

void build_topology(TetMesh& mesh) {
  const int nv = mesh.vertex_count();
  if (nv == 0) throw ValidationError("mesh has no vertices");
  if (mesh.tets.empty()) throw ValidationError("mesh has no tetrahedra");

  // Consistent positive orientation; reject degenerate elements. The
  // degeneracy threshold scales with the bounding box so it is unit-free.
  Vec3 lo = mesh.vertices.front(), hi = mesh.vertices.front();
  for (const auto& p : mesh.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double vol_floor =
      1e-14 * std::max(1e-300, std::pow((hi - lo).norm(), 3));
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    auto& tet = mesh.tets[t];
    for (int v : tet) {
      if (v < 0 || v >= nv)
        throw ValidationError("tet " + std::to_string(t) +
                              " references vertex " + std::to_string(v) +
                              " out of range");
    }
    const double vol = mesh.tet_volume(static_cast<int>(t));
    if (std::abs(vol) < vol_floor)
      throw ValidationError("tet " + std::to_string(t) +
                            " has (near) zero volume");
    if (vol < 0.0) std::swap(tet[2], tet[3]);
  }

  // Unique edges + per-vertex incidence.
  std::map<std::array<int, 2>, int> edge_ids;
  mesh.edges.clear();
  for (const auto& tet : mesh.tets) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        std::array<int, 2> key{std::min(tet[i], tet[j]),
                               std::max(tet[i], tet[j])};
        if (edge_ids.emplace(key, static_cast<int>(mesh.edges.size())).second) {
          mesh.edges.push_back(key);
        }
      }
    }
  }
  mesh.vertex_edge_ids.assign(nv, {});
  for (int e = 0; e < mesh.edge_count(); ++e) {
    mesh.vertex_edge_ids[mesh.edges[e][0]].push_back(e);
    mesh.vertex_edge_ids[mesh.edges[e][1]].push_back(e);
  }

  // Face incidence: boundary faces appear once, interior twice.
  std::map<FaceKey, std::vector<std::pair<int, int>>> face_tets;  // (tet, corner)
  for (int t = 0; t < mesh.tet_count(); ++t) {
    const auto& tet = mesh.tets[t];
    for (int f = 0; f < 4; ++f) {
      face_tets[face_key(tet[kTetFaces[f][0]], tet[kTetFaces[f][1]],
                         tet[kTetFaces[f][2]])]
          .emplace_back(t, f);
    }
  }
  mesh.boundary_faces.clear();
  mesh.boundary_flag.assign(nv, 0);
  mesh.tet_neighbors.assign(mesh.tets.size(), {-1, -1, -1, -1});
  for (const auto& [key, incident] : face_tets) {
    if (incident.size() == 1) {
      const auto [t, f] = incident.front();
      const auto& tet = mesh.tets[t];
      std::array<int, 3> face{tet[kTetFaces[f][0]], tet[kTetFaces[f][1]],
                              tet[kTetFaces[f][2]]};
      mesh.boundary_faces.push_back(face);
      for (int v : face) mesh.boundary_flag[v] = 1;
    } else if (incident.size() == 2) {
      const auto [t0, f0] = incident[0];
      const auto [t1, f1] = incident[1];
      mesh.tet_neighbors[t0][f0] = t1;
      mesh.tet_neighbors[t1][f1] = t0;
    } else {
      throw ValidationError(
          "face shared by " + std::to_string(incident.size()) +
          " tets; mesh is not a valid tetrahedral complex");
    }
  }

  // Cotangent weights: w_ij = (1/6) sum over incident tets of
  // l_op * cot(alpha_op), evaluated as (e_op x a).(e_op x b) / (36 V)
  // which folds the opposite-edge length and dihedral cotangent into one
  // robust expression. Per-tet cotangents are clamped on degenerate
  // dihedrals; the edge is never dropped.
  mesh.cotan_weights.assign(mesh.edges.size(), 0.0);
  mesh.lumped_mass.assign(nv, 0.0);
  for (int t = 0; t < mesh.tet_count(); ++t) {
    const auto& tet = mesh.tets[t];
    const double vol = mesh.tet_volume(t);
    for (int v : tet) mesh.lumped_mass[v] += vol / 4.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        // opposite edge (k, l)
        int k = 0, l = 0, seen = 0;
        for (int c = 0; c < 4; ++c) {
          if (c == i || c == j) continue;
          (seen++ == 0 ? k : l) = c;
        }
        const Vec3& pk = mesh.vertices[tet[k]];
        const Vec3& pl = mesh.vertices[tet[l]];
        const Vec3 e_op = pl - pk;
        const double len_op = e_op.norm();
        const Vec3 na = e_op.cross(mesh.vertices[tet[i]] - pk);
        const Vec3 nb = e_op.cross(mesh.vertices[tet[j]] - pk);
        double cot = na.dot(nb) / (6.0 * vol * len_op);
        cot = std::clamp(cot, -kCotanClamp, kCotanClamp);
        std::array<int, 2> key{std::min(tet[i], tet[j]),
                               std::max(tet[i], tet[j])};
        const auto it = edge_ids.find(key);
        mesh.cotan_weights[it->second] += len_op * cot / 6.0;
      }
    }
  }
}

TetMesh load_tet_mesh(const std::string& path, MeshFormat format) {
  TetMesh mesh = (format == MeshFormat::TetgenNodeEle) ? load_tetgen(path)
                                                       : load_vtk(path);
  build_topology(mesh);
  return mesh;
}

BoundaryData build_boundary(const TetMesh& mesh) {
  const int nv = mesh.vertex_count();
  BoundaryData b;
  b.normals.assign(nv, Vec3::Zero());
  b.k_max.assign(nv, 0.0);
  b.k_min.assign(nv, 0.0);
  b.dir_max.assign(nv, Vec3::Zero());
  b.dir_min.assign(nv, Vec3::Zero());
  b.curvature_warning.assign(nv, 0);
  b.curvature_valid.assign(nv, 0);
  b.edge_is_feature.assign(mesh.edge_count(), 0);
  b.vertex_on_feature.assign(nv, 0);
  b.feature_tangents.assign(nv, Vec3::Zero());
  b.is_corner.assign(nv, 0);

  // Non-manifold check: every boundary edge must bound exactly two
  // boundary faces.
  std::map<std::array<int, 2>, int> boundary_edge_faces;
  for (const auto& f : mesh.boundary_faces) {
    for (int k = 0; k < 3; ++k) {
      std::array<int, 2> key{std::min(f[k], f[(k + 1) % 3]),
                             std::max(f[k], f[(k + 1) % 3])};
      boundary_edge_faces[key] += 1;
    }
  }
  std::string offenders;
  for (const auto& [key, count] : boundary_edge_faces) {
    if (count != 2) {
      offenders += " (" + std::to_string(key[0]) + "," +
                   std::to_string(key[1]) + ")x" + std::to_string(count);
    }
  }
  if (!offenders.empty()) {
    throw ValidationError("non-manifold boundary edges:" + offenders);
  }

  // Angle-weighted vertex normals.
  for (const auto& f : mesh.boundary_faces) {
    const Vec3& p0 = mesh.vertices[f[0]];
    const Vec3& p1 = mesh.vertices[f[1]];
    const Vec3& p2 = mesh.vertices[f[2]];
    const Vec3 n = (p1 - p0).cross(p2 - p0);
    const double nn = n.norm();
    if (nn < 1e-300) continue;
    const Vec3 unit_n = n / nn;
    const Vec3* p[3] = {&p0, &p1, &p2};
    for (int k = 0; k < 3; ++k) {
      const Vec3 u = (*p[(k + 1) % 3] - *p[k]).normalized();
      const Vec3 v = (*p[(k + 2) % 3] - *p[k]).normalized();
      const double angle = std::acos(std::clamp(u.dot(v), -1.0, 1.0));
      b.normals[f[k]] += angle * unit_n;
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (!mesh.boundary_flag[v]) continue;
    const double n = b.normals[v].norm();
    if (n < 1e-300)
      throw ValidationError("degenerate normal at boundary vertex " +
                            std::to_string(v));
    b.normals[v] /= n;
  }
  return b;
}

void detect_features(const TetMesh& mesh, BoundaryData& b,
                     double dihedral_threshold_deg,
                     const std::vector<int>& corner_overrides) {
  // face normals per boundary edge
  std::map<std::array<int, 2>, std::vector<Vec3>> edge_normals;
  for (const auto& f : mesh.boundary_faces) {
    const Vec3 n = (mesh.vertices[f[1]] - mesh.vertices[f[0]])
                       .cross(mesh.vertices[f[2]] - mesh.vertices[f[0]])
                       .normalized();
    for (int k = 0; k < 3; ++k) {
      std::array<int, 2> key{std::min(f[k], f[(k + 1) % 3]),
                             std::max(f[k], f[(k + 1) % 3])};
      edge_normals[key].push_back(n);
    }
  }
  const double threshold = dihedral_threshold_deg * kPi / 180.0;
  b.feature_edges.clear();
  std::fill(b.edge_is_feature.begin(), b.edge_is_feature.end(), 0);
  std::fill(b.vertex_on_feature.begin(), b.vertex_on_feature.end(), 0);
  std::fill(b.feature_tangents.begin(), b.feature_tangents.end(), Vec3::Zero());
  std::vector<int> incident_count(mesh.vertex_count(), 0);

  for (int e = 0; e < mesh.edge_count(); ++e) {
    const auto key = mesh.edges[e];
    const auto it = edge_normals.find(key);
    if (it == edge_normals.end() || it->second.size() != 2) continue;
    // deviation of the dihedral from pi == angle between outward normals
    const double dev = std::acos(
        std::clamp(it->second[0].dot(it->second[1]), -1.0, 1.0));
    if (dev > threshold) {
      b.feature_edges.push_back(e);
      b.edge_is_feature[e] = 1;
      incident_count[key[0]] += 1;
      incident_count[key[1]] += 1;
      b.vertex_on_feature[key[0]] = 1;
      b.vertex_on_feature[key[1]] = 1;
    }
  }

  // Sign-consistent tangents: walk feature edges per vertex, flipping each
  // direction to agree with the first one seen.
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!b.vertex_on_feature[v]) continue;
    Vec3 acc = Vec3::Zero();
    Vec3 ref = Vec3::Zero();
    for (int e : mesh.vertex_edge_ids[v]) {
      if (!b.edge_is_feature[e]) continue;
      Vec3 dir = (mesh.vertices[mesh.other_endpoint(e, v)] - mesh.vertices[v])
                     .normalized();
      if (ref.squaredNorm() == 0.0) {
        ref = dir;
      } else if (ref.dot(dir) < 0.0) {
        dir = -dir;
      }
      acc += dir;
    }
    const double n = acc.norm();
    b.feature_tangents[v] = (n > 1e-12) ? Vec3(acc / n) : ref;
  }

  b.corners.clear();
  std::fill(b.is_corner.begin(), b.is_corner.end(), 0);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (incident_count[v] >= 3) {
      b.corners.push_back(v);
      b.is_corner[v] = 1;
    }
  }
  for (int v : corner_overrides) {
    if (v < 0 || v >= mesh.vertex_count())
      throw ValidationError("corner override vertex " + std::to_string(v) +
                            " out of range");
    if (!b.is_corner[v]) {
      b.corners.push_back(v);
      b.is_corner[v] = 1;
    }
  }
  std::sort(b.corners.begin(), b.corners.end());
}

void write_vtk_mesh_header(std::string& out, const TetMesh& mesh,
                           const std::string& title) {
  std::ostringstream os;
  os.precision(17);
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.vertex_count() << " double\n";
  for (const auto& v : mesh.vertices) {
    os << v.x() << " " << v.y() << " " << v.z() << "\n";
  }
  os << "CELLS " << mesh.tet_count() << " " << 5 * mesh.tet_count() << "\n";
  for (const auto& t : mesh.tets) {
    os << "4 " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  }
  os << "CELL_TYPES " << mesh.tet_count() << "\n";
  for (int t = 0; t < mesh.tet_count(); ++t) os << "10\n";
  out += os.str();
}

}  // namespace odeco
