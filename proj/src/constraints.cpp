#include "odeco/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace odeco {

namespace {

using nlohmann::ordered_json;

Vec3 parse_vec3(const ordered_json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw ValidationError("guidance: " + what + " must be a 3-array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

int parse_vertex(const ordered_json& entry, int vertex_count,
                 const std::string& section) {
  if (!entry.contains("vertex"))
    throw ValidationError("guidance: entry in '" + section +
                          "' missing 'vertex'");
  const long v = entry["vertex"].get<long>();
  if (v < 0 || v >= vertex_count)
    throw ValidationError("guidance: vertex " + std::to_string(v) + " in '" +
                          section + "' out of range (mesh has " +
                          std::to_string(vertex_count) + " vertices)");
  return static_cast<int>(v);
}

void check_positive(const Vec3& lambda, int vertex,
                    const std::string& section) {
  if (lambda.minCoeff() <= 0.0)
    throw ValidationError("guidance: non-positive lambda at vertex " +
                          std::to_string(vertex) + " in '" + section + "'");
}

}  // namespace

ConstraintSet parse_guidance(const std::string& path, int vertex_count) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open guidance file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("guidance: JSON parse error in " + path + ": " +
                          e.what());
  }

  ConstraintSet c;
  auto claimed = [&](int v) {
    return c.soft_lambda.count(v) || c.hard_lambda.count(v) ||
           c.hard_tensor.count(v);
  };
  auto claim = [&](int v, const std::string& section) {
    if (claimed(v))
      throw ValidationError("guidance: vertex " + std::to_string(v) +
                            " assigned by more than one section ('" + section +
                            "')");
  };

  for (const auto& entry : j.value("soft_lambda", ordered_json::array())) {
    const int v = parse_vertex(entry, vertex_count, "soft_lambda");
    claim(v, "soft_lambda");
    ConstraintSet::SoftLambda s;
    s.target = parse_vec3(entry.at("lambda"), "soft_lambda.lambda");
    check_positive(s.target, v, "soft_lambda");
    s.weight = entry.value("weight", 1.0);
    if (s.weight <= 0.0)
      throw ValidationError("guidance: non-positive weight at vertex " +
                            std::to_string(v));
    if (entry.contains("active")) {
      const auto& a = entry["active"];
      if (!a.is_array() || a.size() != 3)
        throw ValidationError("guidance: 'active' must be a 3-array");
      for (int k = 0; k < 3; ++k) s.active[k] = a[k].get<bool>();
    }
    c.soft_lambda.emplace(v, s);
  }
  for (const auto& entry : j.value("hard_lambda", ordered_json::array())) {
    const int v = parse_vertex(entry, vertex_count, "hard_lambda");
    claim(v, "hard_lambda");
    const Vec3 lambda = parse_vec3(entry.at("lambda"), "hard_lambda.lambda");
    check_positive(lambda, v, "hard_lambda");
    c.hard_lambda.emplace(v, lambda);
  }
  for (const auto& entry : j.value("hard_tensor", ordered_json::array())) {
    const int v = parse_vertex(entry, vertex_count, "hard_tensor");
    claim(v, "hard_tensor");
    const Vec3 theta = parse_vec3(entry.at("theta"), "hard_tensor.theta");
    const Vec3 lambda = parse_vec3(entry.at("lambda"), "hard_tensor.lambda");
    check_positive(lambda, v, "hard_tensor");
    c.hard_tensor.emplace(v, std::make_pair(theta, lambda));
  }
  for (const auto& entry : j.value("corner_overrides", ordered_json::array())) {
    const long v = entry.get<long>();
    if (v < 0 || v >= vertex_count)
      throw ValidationError("guidance: corner override vertex " +
                            std::to_string(v) + " out of range");
    c.corner_overrides.push_back(static_cast<int>(v));
  }
  if (j.contains("options")) {
    const auto& opt = j["options"];
    c.lock_boundary = opt.value("lock_boundary", true);
    c.lock_features = opt.value("lock_features", true);
  }
  return c;
}

std::string serialize_guidance(const ConstraintSet& c) {
  ordered_json j;
  j["version"] = 1;
  j["soft_lambda"] = ordered_json::array();
  for (const auto& [v, s] : c.soft_lambda) {
    ordered_json e;
    e["vertex"] = v;
    e["lambda"] = {s.target.x(), s.target.y(), s.target.z()};
    e["weight"] = s.weight;
    e["active"] = {s.active[0], s.active[1], s.active[2]};
    j["soft_lambda"].push_back(e);
  }
  j["hard_lambda"] = ordered_json::array();
  for (const auto& [v, lambda] : c.hard_lambda) {
    ordered_json e;
    e["vertex"] = v;
    e["lambda"] = {lambda.x(), lambda.y(), lambda.z()};
    j["hard_lambda"].push_back(e);
  }
  j["hard_tensor"] = ordered_json::array();
  for (const auto& [v, tl] : c.hard_tensor) {
    ordered_json e;
    e["vertex"] = v;
    e["theta"] = {tl.first.x(), tl.first.y(), tl.first.z()};
    e["lambda"] = {tl.second.x(), tl.second.y(), tl.second.z()};
    j["hard_tensor"].push_back(e);
  }
  j["corner_overrides"] = c.corner_overrides;
  j["options"] = {{"lock_boundary", c.lock_boundary},
                  {"lock_features", c.lock_features}};
  return j.dump(2);
}

void add_curvature_guidance(ConstraintSet& c, const TetMesh& mesh,
                            const BoundaryData& boundary, double clamp_lo,
                            double clamp_hi, const double* pin_lambda_z) {
  if (!(clamp_lo > 0.0) || !(clamp_hi >= clamp_lo))
    throw ValidationError("curvature guidance: bad clamp range");
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!mesh.boundary_flag[v]) continue;
    if (c.hard_tensor.count(v) || c.hard_lambda.count(v) ||
        c.soft_lambda.count(v))
      continue;  // explicit guidance wins
    const double kmax = boundary.k_max[v];
    const double kmin = boundary.k_min[v];
    double ratio;
    if (std::abs(kmin) < 1e-8 * std::abs(kmax)) {
      ratio = clamp_hi;  // K_min ~ 0: maximal anisotropy
    } else {
      ratio = std::abs(kmax / kmin);
    }
    ConstraintSet::SoftLambda s;
    s.target = Vec3(std::clamp(ratio, clamp_lo, clamp_hi), 1.0, 1.0);
    s.active = {true, true, false};  // lambda_z free by default
    if (pin_lambda_z) {
      double lz = *pin_lambda_z;
      const double degenerate = (5.0 / 6.0) * (s.target.x() + s.target.y());
      if (std::abs(lz - degenerate) < 1e-6) {
        lz = degenerate + 1e-3 * std::max(1.0, std::abs(degenerate));
      }
      s.target.z() = lz;
      s.active[2] = true;
    }
    c.soft_lambda.emplace(v, s);
  }
}

FieldGuidance field_guidance(const TetMesh& mesh,
                             const std::vector<Mat3>& raw_field,
                             ValueMap value_map) {
  if (static_cast<int>(raw_field.size()) != mesh.vertex_count())
    throw ValidationError("field guidance: field size does not match mesh");
  for (std::size_t v = 0; v < raw_field.size(); ++v) {
    if ((raw_field[v] - raw_field[v].transpose()).cwiseAbs().maxCoeff() > 1e-6)
      throw ValidationError("field guidance: non-symmetric tensor at vertex " +
                            std::to_string(v));
  }

  // log_clamp maps eigenvalue magnitudes onto [1, 50]:
  //   e -> 1 + 49 log(e / e_min) / log(e_max / e_min).
  double e_min = 1e300, e_max = 0.0;
  if (value_map == ValueMap::LogClamp) {
    for (const auto& s : raw_field) {
      Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (s + s.transpose()));
      for (int k = 0; k < 3; ++k) {
        const double e = std::abs(es.eigenvalues()[k]);
        e_min = std::min(e_min, e);
        e_max = std::max(e_max, e);
      }
    }
    e_min = std::max(e_min, 1e-300);
  }

  FieldGuidance out;
  out.theta.resize(raw_field.size());
  out.lambda.resize(raw_field.size());
  out.reference.resize(raw_field.size());
  Mat3 prev_frame = Mat3::Identity();
  for (std::size_t v = 0; v < raw_field.size(); ++v) {
    Mat3 s = 0.5 * (raw_field[v] + raw_field[v].transpose());
    if (value_map == ValueMap::LogClamp) {
      Eigen::SelfAdjointEigenSolver<Mat3> es(s);
      Vec3 mapped;
      for (int k = 0; k < 3; ++k) {
        const double e = std::max(std::abs(es.eigenvalues()[k]), e_min);
        mapped[k] =
            (e_max > e_min * (1.0 + 1e-12))
                ? 1.0 + 49.0 * std::log(e / e_min) / std::log(e_max / e_min)
                : 1.0;
      }
      s = es.eigenvectors() * mapped.asDiagonal() *
          es.eigenvectors().transpose();
    }
    const auto [theta, lambda] = from_symmetric_matrix(s, &prev_frame);
    out.theta[v] = theta;
    out.lambda[v] = lambda;
    out.reference[v] = rotation_operator(theta) * canonical_tensor(lambda);
    prev_frame = euler_to_matrix(theta);
  }
  return out;
}

}  // namespace odeco
