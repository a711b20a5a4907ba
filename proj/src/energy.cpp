#include "odeco/energy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <thread>

#include "odeco/kernels.hpp"

namespace odeco {

const char* vertex_class_name(VertexClass c) {
  switch (c) {
    case VertexClass::Interior: return "interior";
    case VertexClass::Boundary: return "boundary";
    case VertexClass::FeatureEdge: return "feature";
    case VertexClass::Corner: return "corner";
    case VertexClass::HardFixed: return "fixed";
  }
  return "?";
}

namespace {

int thread_count() {
  static const int n = [] {
    if (const char* env = std::getenv("ODECO_THREADS")) {
      const int v = std::atoi(env);
      if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
  }();
  return n;
}

}  // namespace

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int threads = thread_count();
  if (threads <= 1 || n < 192) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  // Fixed chunking: work distribution never depends on timing, so writes
  // into per-index slots give bit-identical results for any thread count.
  constexpr int kChunk = 64;
  const int n_chunks = (n + kChunk - 1) / kChunk;
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= n_chunks) return;
      const int lo = c * kChunk;
      const int hi = std::min(n, lo + kChunk);
      for (int i = lo; i < hi; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

Vec15 FrameField::realize_vertex(int v) const {
  const VertexFrame& fr = frames[v];
  switch (fr.cls) {
    case VertexClass::HardFixed:
      return fixed_tensor[v];
    case VertexClass::Interior: {
      Vec15 f = canonical_tensor(fr.lambda);
      zrot_apply(fr.theta.z(), f);
      f = detail::yrot_apply(fr.theta.y(), f);
      return detail::xrot_apply(fr.theta.x(), f);
    }
    case VertexClass::Boundary:
    case VertexClass::FeatureEdge: {
      Vec15 f = canonical_tensor(fr.lambda);
      zrot_apply(fr.theta.z(), f);
      return axis_rotation[v] * f;
    }
    case VertexClass::Corner:
      return axis_rotation[v] * canonical_tensor(fr.lambda);
  }
  return Vec15::Zero();
}

Mat3 FrameField::frame3(int v) const {
  const VertexFrame& fr = frames[v];
  switch (fr.cls) {
    case VertexClass::Interior:
    case VertexClass::HardFixed:
      return euler_to_matrix(fr.theta);
    case VertexClass::Boundary:
    case VertexClass::FeatureEdge: {
      const double c = std::cos(fr.theta.z()), s = std::sin(fr.theta.z());
      Mat3 rz;
      rz << c, -s, 0, s, c, 0, 0, 0, 1;
      return axis_frame(axis[v]) * rz;
    }
    case VertexClass::Corner:
      return axis_frame(axis[v]);
  }
  return Mat3::Identity();
}

FrameField make_frame_field(const TetMesh& mesh, const BoundaryData& boundary,
                            const ConstraintSet& constraints) {
  const int nv = mesh.vertex_count();
  FrameField field;
  field.frames.assign(nv, VertexFrame{});
  field.axis.assign(nv, Vec3::Zero());
  field.axis_rotation.assign(nv, Mat15::Identity());
  field.fixed_tensor.assign(nv, Vec15::Zero());

  for (int v = 0; v < nv; ++v) {
    VertexFrame& fr = field.frames[v];
    if (constraints.hard_tensor.count(v)) {
      const auto& [theta, lambda] = constraints.hard_tensor.at(v);
      fr.cls = VertexClass::HardFixed;
      fr.theta = theta;
      fr.lambda = lambda;
      fr.lambda_fixed = true;
      field.fixed_tensor[v] =
          rotation_operator(theta) * canonical_tensor(lambda);
      continue;
    }
    if (mesh.boundary_flag[v] && constraints.lock_boundary) {
      if (constraints.lock_features && boundary.is_corner[v]) {
        fr.cls = VertexClass::Corner;
        field.axis[v] = boundary.feature_tangents[v];
      } else if (constraints.lock_features && boundary.vertex_on_feature[v]) {
        fr.cls = VertexClass::FeatureEdge;
        field.axis[v] = boundary.feature_tangents[v];
      } else {
        fr.cls = VertexClass::Boundary;
        field.axis[v] = boundary.normals[v];
      }
      field.axis_rotation[v] = normal_rotation(field.axis[v]);
    }
    if (const auto it = constraints.hard_lambda.find(v);
        it != constraints.hard_lambda.end()) {
      fr.lambda = it->second;
      fr.lambda_fixed = true;
    }
  }
  return field;
}

ParamLayout ParamLayout::build(const FrameField& field, DofScope scope) {
  ParamLayout layout;
  const int nv = field.vertex_count();
  layout.offset.resize(nv);
  layout.theta_dof.resize(nv);
  layout.lambda_dof.resize(nv);
  int cursor = 0;
  for (int v = 0; v < nv; ++v) {
    const VertexFrame& fr = field.frames[v];
    int td = 0;
    switch (fr.cls) {
      case VertexClass::Interior: td = 3; break;
      case VertexClass::Boundary:
      case VertexClass::FeatureEdge: td = 1; break;
      default: td = 0;
    }
    int ld = (fr.cls == VertexClass::HardFixed || fr.lambda_fixed) ? 0 : 3;
    if (scope == DofScope::ThetaOnly) ld = 0;
    layout.offset[v] = cursor;
    layout.theta_dof[v] = static_cast<std::uint8_t>(td);
    layout.lambda_dof[v] = static_cast<std::uint8_t>(ld);
    cursor += td + ld;
  }
  layout.total = cursor;
  return layout;
}

void pack_params(const FrameField& field, const ParamLayout& layout,
                 std::vector<double>& x) {
  x.resize(layout.total);
  for (int v = 0; v < field.vertex_count(); ++v) {
    double* p = x.data() + layout.offset[v];
    const VertexFrame& fr = field.frames[v];
    switch (layout.theta_dof[v]) {
      case 3:
        *p++ = fr.theta.x();
        *p++ = fr.theta.y();
        [[fallthrough]];
      case 1:
        *p++ = fr.theta.z();
        break;
      default: break;
    }
    if (layout.lambda_dof[v] == 3) {
      *p++ = fr.lambda.x();
      *p++ = fr.lambda.y();
      *p++ = fr.lambda.z();
    }
  }
}

void unpack_params(FrameField& field, const ParamLayout& layout,
                   std::span<const double> x) {
  for (int v = 0; v < field.vertex_count(); ++v) {
    const double* p = x.data() + layout.offset[v];
    VertexFrame& fr = field.frames[v];
    switch (layout.theta_dof[v]) {
      case 3:
        fr.theta.x() = *p++;
        fr.theta.y() = *p++;
        [[fallthrough]];
      case 1:
        fr.theta.z() = *p++;
        break;
      default: break;
    }
    if (layout.lambda_dof[v] == 3) {
      fr.lambda.x() = *p++;
      fr.lambda.y() = *p++;
      fr.lambda.z() = *p++;
    }
  }
}

EnergyModel::EnergyModel(const TetMesh& mesh, FrameField& field,
                         const ConstraintSet& constraints, Mode mode,
                         double weight, DofScope scope,
                         const std::vector<Vec15>* reference)
    : mesh_(&mesh),
      field_(&field),
      constraints_(&constraints),
      mode_(mode),
      weight_(weight),
      scope_(scope),
      reference_(reference),
      layout_(ParamLayout::build(field, scope)) {
  if (!(weight_ > 0.0)) throw ValidationError("energy: weight must be > 0");
  if (mode_ == Mode::Smooth &&
      (!reference_ ||
       static_cast<int>(reference_->size()) != mesh.vertex_count())) {
    throw ValidationError("energy: smoothing mode needs a full reference field");
  }
  const int nv = mesh.vertex_count();
  coeffs_.resize(nv, kCoeffCount);
  cograd_.resize(nv, kCoeffCount);
  jacobians_.resize(nv);
  edge_a_.reserve(mesh.edge_count());
  edge_b_.reserve(mesh.edge_count());
  edge_w_.reserve(mesh.edge_count());
  for (int e = 0; e < mesh.edge_count(); ++e) {
    edge_a_.push_back(mesh.edges[e][0]);
    edge_b_.push_back(mesh.edges[e][1]);
    edge_w_.push_back(mesh.cotan_weights[e]);
  }
}

std::vector<double> EnergyModel::pack() const {
  std::vector<double> x;
  pack_params(*field_, layout_, x);
  return x;
}

void EnergyModel::unpack(std::span<const double> x) {
  unpack_params(*field_, layout_, x);
}

void EnergyModel::project_lambda(std::vector<double>& x, double floor) const {
  for (int v = 0; v < field_->vertex_count(); ++v) {
    if (layout_.lambda_dof[v] != 3) continue;
    double* p = x.data() + layout_.offset[v] + layout_.theta_dof[v];
    for (int k = 0; k < 3; ++k) p[k] = std::max(p[k], floor);
  }
}

EnergyBreakdown EnergyModel::evaluate(std::span<const double> x,
                                      std::vector<double>* grad) {
  unpack(x);
  return evaluate_current(grad);
}

EnergyBreakdown EnergyModel::evaluate_current(std::vector<double>* grad) {
  const int nv = mesh_->vertex_count();
  const bool want_grad = grad != nullptr;
  const FrameField& field = *field_;

  // Realize all tensors (and parameter Jacobians) vertex-parallel.
  parallel_for(nv, [&](int v) {
    const VertexFrame& fr = field.frames[v];
    Vec15 f;
    auto& jac = jacobians_[v];
    const int td = layout_.theta_dof[v];
    const int ld = layout_.lambda_dof[v];
    switch (fr.cls) {
      case VertexClass::HardFixed:
        f = field.fixed_tensor[v];
        break;
      case VertexClass::Interior: {
        const Mat15x3& basis = tables().stretch_basis;
        Vec15 u0 = basis * fr.lambda;
        zrot_apply(fr.theta.z(), u0);           // u0 = Rz f_hat
        const Vec15 u1 = detail::yrot_apply(fr.theta.y(), u0);
        f = detail::xrot_apply(fr.theta.x(), u1);
        if (want_grad && td == 3) {
          jac.col(0) = tables().Lx * f;
          jac.col(1) = detail::xrot_apply(fr.theta.x(), tables().Ly * u1);
          jac.col(2) = detail::xrot_apply(
              fr.theta.x(),
              detail::yrot_apply(fr.theta.y(), tables().Lz * u0));
        }
        if (want_grad && ld == 3) {
          for (int a = 0; a < 3; ++a) {
            Vec15 col = basis.col(a);
            zrot_apply(fr.theta.z(), col);
            col = detail::yrot_apply(fr.theta.y(), col);
            jac.col(td + a) = detail::xrot_apply(fr.theta.x(), col);
          }
        }
        break;
      }
      case VertexClass::Boundary:
      case VertexClass::FeatureEdge: {
        const Mat15x3& basis = tables().stretch_basis;
        Vec15 u0 = basis * fr.lambda;
        zrot_apply(fr.theta.z(), u0);
        f = field.axis_rotation[v] * u0;
        if (want_grad && td == 1) {
          jac.col(0) = field.axis_rotation[v] * (tables().Lz * u0);
        }
        if (want_grad && ld == 3) {
          for (int a = 0; a < 3; ++a) {
            Vec15 col = basis.col(a);
            zrot_apply(fr.theta.z(), col);
            jac.col(td + a) = field.axis_rotation[v] * col;
          }
        }
        break;
      }
      case VertexClass::Corner: {
        const Mat15x3& basis = tables().stretch_basis;
        f = field.axis_rotation[v] * (basis * fr.lambda);
        if (want_grad && ld == 3) {
          jac.template block<kCoeffCount, 3>(0, 0) =
              field.axis_rotation[v] * basis;
        }
        break;
      }
    }
    coeffs_.row(v) = f.transpose();
  });

  EnergyBreakdown out;
  out.mode = mode_;
  out.weight = weight_;
  out.per_vertex_smoothness.assign(nv, 0.0);
  out.smoothness = kernels::edge_energy(
      coeffs_.data(), edge_a_.data(), edge_b_.data(), edge_w_.data(),
      edge_w_.size(), out.per_vertex_smoothness.data());

  if (want_grad) {
    cograd_.setZero();
    kernels::edge_cogradient(coeffs_.data(), edge_a_.data(), edge_b_.data(),
                             edge_w_.data(), edge_w_.size(), cograd_.data());
  }

  // Penalty term and its contribution.
  double penalty = 0.0;
  if (mode_ == Mode::Design) {
    for (const auto& [v, soft] : constraints_->soft_lambda) {
      const Vec3& lambda = field.frames[v].lambda;
      for (int k = 0; k < 3; ++k) {
        if (!soft.active[k]) continue;
        const double d = lambda[k] - soft.target[k];
        penalty += soft.weight * d * d;
      }
    }
  } else {
    const auto& ref = *reference_;
    for (int v = 0; v < nv; ++v) {
      double d2 = 0.0;
      for (int k = 0; k < kCoeffCount; ++k) {
        const double d = coeffs_(v, k) - ref[v][k];
        d2 += d * d;
      }
      penalty += d2;
      if (want_grad) {
        for (int k = 0; k < kCoeffCount; ++k) {
          cograd_(v, k) += 2.0 * weight_ * (coeffs_(v, k) - ref[v][k]);
        }
      }
    }
  }
  out.penalty = penalty;
  out.total = out.smoothness + weight_ * penalty;

  if (want_grad) {
    grad->assign(layout_.total, 0.0);
    parallel_for(nv, [&](int v) {
      const int td = layout_.theta_dof[v];
      const int ld = layout_.lambda_dof[v];
      if (td + ld == 0) return;
      const Vec15 c = cograd_.row(v).transpose();
      double* g = grad->data() + layout_.offset[v];
      const auto& jac = jacobians_[v];
      for (int k = 0; k < td + ld; ++k) g[k] = jac.col(k).dot(c);
      if (mode_ == Mode::Design && ld == 3) {
        const auto it = constraints_->soft_lambda.find(v);
        if (it != constraints_->soft_lambda.end()) {
          const auto& soft = it->second;
          const Vec3& lambda = field.frames[v].lambda;
          for (int k = 0; k < 3; ++k) {
            if (!soft.active[k]) continue;
            g[td + k] +=
                2.0 * weight_ * soft.weight * (lambda[k] - soft.target[k]);
          }
        }
      }
    });
  }
  return out;
}

std::pair<double, std::vector<double>> smoothness_energy(
    const TetMesh& mesh, const std::vector<Vec15>& coeffs) {
  Eigen::Matrix<double, Eigen::Dynamic, kCoeffCount, Eigen::RowMajor> rows(
      mesh.vertex_count(), kCoeffCount);
  for (int v = 0; v < mesh.vertex_count(); ++v)
    rows.row(v) = coeffs[v].transpose();
  std::vector<std::int32_t> a, b;
  std::vector<double> w;
  for (int e = 0; e < mesh.edge_count(); ++e) {
    a.push_back(mesh.edges[e][0]);
    b.push_back(mesh.edges[e][1]);
    w.push_back(mesh.cotan_weights[e]);
  }
  std::vector<double> per_vertex(mesh.vertex_count(), 0.0);
  const double total = kernels::edge_energy(rows.data(), a.data(), b.data(),
                                            w.data(), w.size(),
                                            per_vertex.data());
  return {total, per_vertex};
}

double guidance_energy(const FrameField& field,
                       const ConstraintSet& constraints) {
  double e = 0.0;
  for (const auto& [v, soft] : constraints.soft_lambda) {
    for (int k = 0; k < 3; ++k) {
      if (!soft.active[k]) continue;
      const double d = field.frames[v].lambda[k] - soft.target[k];
      e += soft.weight * d * d;
    }
  }
  return e;
}

double distortion_energy(const std::vector<Vec15>& coeffs,
                         const std::vector<Vec15>& reference) {
  double e = 0.0;
  for (std::size_t v = 0; v < coeffs.size(); ++v) {
    e += (coeffs[v] - reference[v]).squaredNorm();
  }
  return e;
}

}  // namespace odeco
