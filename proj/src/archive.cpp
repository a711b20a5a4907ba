#include "odeco/archive.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace odeco {

namespace {

using nlohmann::ordered_json;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("short write: " + path);
}

}  // namespace

void save_archive(const std::string& prefix, const TetMesh& mesh,
                  const FrameField& field, const ConstraintSet& constraints,
                  Mode mode, double weight, const SolverReport& report,
                  const SolverConfig& config) {
  const int nv = mesh.vertex_count();
  std::string vtk;
  write_vtk_mesh_header(vtk, mesh, "odecofield archive");
  std::ostringstream os;
  os.precision(17);
  os << "POINT_DATA " << nv << "\n";

  os << "SCALARS vertex_class int 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < nv; ++v)
    os << static_cast<int>(field.frames[v].cls) << "\n";

  os << "SCALARS lambda_fixed int 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < nv; ++v)
    os << (field.frames[v].lambda_fixed ? 1 : 0) << "\n";

  os << "SCALARS smoothness double 1\nLOOKUP_TABLE default\n";
  for (int v = 0; v < nv; ++v) {
    const double e = v < static_cast<int>(
                             report.final_energy.per_vertex_smoothness.size())
                         ? report.final_energy.per_vertex_smoothness[v]
                         : 0.0;
    os << e << "\n";
  }

  auto write_vec3 = [&](const char* name, auto&& getter) {
    os << "VECTORS " << name << " double\n";
    for (int v = 0; v < nv; ++v) {
      const Vec3 x = getter(v);
      os << x.x() << " " << x.y() << " " << x.z() << "\n";
    }
  };
  write_vec3("theta", [&](int v) { return field.frames[v].theta; });
  write_vec3("lambda", [&](int v) { return field.frames[v].lambda; });
  write_vec3("axis", [&](int v) { return field.axis[v]; });

  os << "TENSORS glyph double\n";
  for (int v = 0; v < nv; ++v) {
    const Mat3 g = glyph_matrix(field.frame3(v), field.frames[v].lambda);
    for (int r = 0; r < 3; ++r) {
      os << g(r, 0) << " " << g(r, 1) << " " << g(r, 2) << "\n";
    }
  }

  os << "FIELD coefficients 1\ncoeffs " << kCoeffCount << " " << nv
     << " double\n";
  for (int v = 0; v < nv; ++v) {
    const Vec15 f = field.realize_vertex(v);
    for (int k = 0; k < kCoeffCount; ++k)
      os << f[k] << (k + 1 == kCoeffCount ? "\n" : " ");
  }
  vtk += os.str();
  write_file(prefix + ".vtk", vtk);

  ordered_json j;
  j["format"] = "odecofield-archive";
  j["version"] = 1;
  j["mode"] = (mode == Mode::Design) ? "design" : "smooth";
  j["weight"] = weight;
  j["constraints"] = ordered_json::parse(serialize_guidance(constraints));
  j["report"] = ordered_json::parse(report_to_json(report, config, true));
  write_file(prefix + ".json", j.dump(2));
}

namespace {

struct VtkPointData {
  std::vector<int> vertex_class;
  std::vector<int> lambda_fixed;
  std::vector<Vec3> theta, lambda, axis;
  std::vector<Vec15> coeffs;
};

VtkPointData read_point_data(const std::string& path, int nv) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open archive: " + path);
  VtkPointData d;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "SCALARS") {
      std::string name, type;
      ls >> name >> type;
      std::string lut;
      std::getline(in, lut);  // LOOKUP_TABLE default
      if (name == "vertex_class" || name == "lambda_fixed") {
        std::vector<int>& dst =
            (name == "vertex_class") ? d.vertex_class : d.lambda_fixed;
        dst.resize(nv);
        for (int v = 0; v < nv; ++v) {
          if (!(in >> dst[v])) throw IoError(path + ": truncated " + name);
        }
      }
    } else if (key == "VECTORS") {
      std::string name, type;
      ls >> name >> type;
      std::vector<Vec3>* dst = nullptr;
      if (name == "theta") dst = &d.theta;
      if (name == "lambda") dst = &d.lambda;
      if (name == "axis") dst = &d.axis;
      if (!dst) continue;
      dst->resize(nv);
      for (int v = 0; v < nv; ++v) {
        double x, y, z;
        if (!(in >> x >> y >> z)) throw IoError(path + ": truncated " + name);
        (*dst)[v] = Vec3(x, y, z);
      }
    } else if (key == "FIELD") {
      std::string dummy;
      int arrays = 0;
      ls >> dummy >> arrays;
      for (int a = 0; a < arrays; ++a) {
        std::string name, type;
        int comps = 0, tuples = 0;
        if (!(in >> name >> comps >> tuples >> type))
          throw IoError(path + ": bad FIELD header");
        if (name == "coeffs" && comps == kCoeffCount && tuples == nv) {
          d.coeffs.resize(nv);
          for (int v = 0; v < nv; ++v)
            for (int k = 0; k < kCoeffCount; ++k)
              if (!(in >> d.coeffs[v][k]))
                throw IoError(path + ": truncated coeffs");
        } else {
          double skip;
          for (long i = 0; i < static_cast<long>(comps) * tuples; ++i)
            in >> skip;
        }
      }
    }
  }
  if (d.vertex_class.empty() || d.theta.empty() || d.lambda.empty() ||
      d.axis.empty())
    throw IoError(path + ": missing archive point-data arrays");
  return d;
}

}  // namespace

FieldArchive load_archive(const std::string& prefix) {
  FieldArchive a;
  a.mesh = load_tet_mesh(prefix + ".vtk", MeshFormat::VtkLegacy);
  const int nv = a.mesh.vertex_count();
  const VtkPointData d = read_point_data(prefix + ".vtk", nv);

  std::ifstream jin(prefix + ".json");
  if (!jin) throw IoError("cannot open archive: " + prefix + ".json");
  ordered_json j;
  try {
    jin >> j;
  } catch (const std::exception& e) {
    throw IoError(prefix + ".json: parse error: " + e.what());
  }
  a.mode = (j.value("mode", "design") == std::string("smooth")) ? Mode::Smooth
                                                                : Mode::Design;
  a.weight = j.value("weight", 50.0);
  {
    const std::string tmp = prefix + ".json.constraints.tmp";
    // constraints echo is embedded; parse it through the same validator
    std::ofstream out(tmp);
    out << j.at("constraints").dump();
    out.close();
    a.constraints = parse_guidance(tmp, nv);
    std::remove(tmp.c_str());
  }

  a.field.frames.assign(nv, VertexFrame{});
  a.field.axis.assign(nv, Vec3::Zero());
  a.field.axis_rotation.assign(nv, Mat15::Identity());
  a.field.fixed_tensor.assign(nv, Vec15::Zero());
  a.stored_coeffs = d.coeffs;
  for (int v = 0; v < nv; ++v) {
    VertexFrame& fr = a.field.frames[v];
    fr.cls = static_cast<VertexClass>(d.vertex_class[v]);
    fr.theta = d.theta[v];
    fr.lambda = d.lambda[v];
    fr.lambda_fixed =
        !d.lambda_fixed.empty() && d.lambda_fixed[v] != 0;
    a.field.axis[v] = d.axis[v];
    if (fr.cls == VertexClass::Boundary || fr.cls == VertexClass::FeatureEdge ||
        fr.cls == VertexClass::Corner) {
      a.field.axis_rotation[v] = normal_rotation(d.axis[v].normalized());
    }
    if (fr.cls == VertexClass::HardFixed) {
      if (d.coeffs.empty())
        throw IoError(prefix + ": hard-fixed vertex without stored coeffs");
      a.field.fixed_tensor[v] = d.coeffs[v];
    }
  }
  if (j.contains("report") && j["report"].contains("energy")) {
    const auto& e = j["report"]["energy"];
    a.energy.total = e.value("total", 0.0);
    a.energy.smoothness = e.value("smoothness", 0.0);
    a.energy.penalty = e.value("penalty", 0.0);
    a.energy.weight = e.value("weight", a.weight);
  }
  a.glyph_matrices.resize(nv);
  for (int v = 0; v < nv; ++v) {
    a.glyph_matrices[v] =
        glyph_matrix(a.field.frame3(v), a.field.frames[v].lambda);
  }
  return a;
}

std::vector<Mat3> read_vtk_tensor_field(const std::string& path,
                                        int expected_vertices) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field file: " + path);
  std::string line;
  std::vector<Mat3> field;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "TENSORS") {
      field.resize(expected_vertices);
      for (int v = 0; v < expected_vertices; ++v) {
        Mat3 m;
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            if (!(in >> m(r, c)))
              throw IoError(path + ": truncated TENSORS block");
        field[v] = m;
      }
      return field;
    }
  }
  throw IoError(path + ": no TENSORS block found");
}

void write_vtk_tensor_field(const std::string& path, const TetMesh& mesh,
                            const std::vector<Mat3>& field) {
  if (static_cast<int>(field.size()) != mesh.vertex_count())
    throw ValidationError("tensor field size does not match mesh");
  std::string vtk;
  write_vtk_mesh_header(vtk, mesh, "tensor field");
  std::ostringstream os;
  os.precision(17);
  os << "POINT_DATA " << mesh.vertex_count() << "\n";
  os << "TENSORS tensors double\n";
  for (const auto& m : field) {
    for (int r = 0; r < 3; ++r)
      os << m(r, 0) << " " << m(r, 1) << " " << m(r, 2) << "\n";
  }
  write_file(path, vtk + os.str());
}

}  // namespace odeco
