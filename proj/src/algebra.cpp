#include "odeco/algebra.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>

namespace odeco {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

Vec15 detail::xrot_apply(double angle, const Vec15& v) {
  const ShTables& t = tables();
  Vec15 u = t.conj_y90.transpose() * v;
  zrot_apply(angle, u);
  return t.conj_y90 * u;
}

Vec15 detail::yrot_apply(double angle, const Vec15& v) {
  const ShTables& t = tables();
  Vec15 u = t.conj_xm90.transpose() * v;
  zrot_apply(angle, u);
  return t.conj_xm90 * u;
}

Mat15 rotation_operator(const Vec3& theta) {
  const ShTables& t = tables();
  // exp(a Lx) = C_y90 exp(a Lz) C_y90^T and likewise for Ly, so every
  // factor reduces to the analytic z-rotation; no matrix exponential is
  // required and the result is orthogonal to round-off.
  Mat15 rz = zrot_matrix(theta.z());
  Mat15 ry = t.conj_xm90 * zrot_matrix(theta.y()) * t.conj_xm90.transpose();
  Mat15 rx = t.conj_y90 * zrot_matrix(theta.x()) * t.conj_y90.transpose();
  return rx * (ry * rz);
}

Mat3 euler_to_matrix(const Vec3& theta) {
  const double cx = std::cos(theta.x()), sx = std::sin(theta.x());
  const double cy = std::cos(theta.y()), sy = std::sin(theta.y());
  const double cz = std::cos(theta.z()), sz = std::sin(theta.z());
  Mat3 rx, ry, rz;
  rx << 1, 0, 0, 0, cx, -sx, 0, sx, cx;
  ry << cy, 0, sy, 0, 1, 0, -sy, 0, cy;
  rz << cz, -sz, 0, sz, cz, 0, 0, 0, 1;
  return rx * ry * rz;
}

Vec3 matrix_to_euler(const Mat3& r) {
  // R = Rx(a) Ry(b) Rz(c):
  //   R(0,2) = sin b
  //   a = atan2(-R(1,2), R(2,2)),  c = atan2(-R(0,1), R(0,0))
  const double sy = std::clamp(r(0, 2), -1.0, 1.0);
  if (std::abs(sy) > 1.0 - 1e-12) {
    // Gimbal lock: only a +/- c is determined; fix c = 0.
    const double b = (sy > 0) ? 0.5 * kPi : -0.5 * kPi;
    const double a = (sy > 0) ? std::atan2(r(1, 0), r(1, 1))
                              : std::atan2(-r(1, 0), r(1, 1));
    return Vec3(a, b, 0.0);
  }
  return Vec3(std::atan2(-r(1, 2), r(2, 2)), std::asin(sy),
              std::atan2(-r(0, 1), r(0, 0)));
}

OdecoVec canonical_tensor(const Vec3& lambda) {
  return tables().stretch_basis * lambda;
}

Mat3 axis_frame(const Vec3& axis) {
  const Vec3 z(0.0, 0.0, 1.0);
  const double c = axis.dot(z);
  if (c < -1.0 + 1e-9) {
    // axis ~ -z: fixed pi-rotation about x.
    Mat3 m;
    m << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    return m;
  }
  const Vec3 v = z.cross(axis);
  Mat3 vx;
  vx << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return Mat3::Identity() + vx + vx * vx / (1.0 + c);
}

Mat15 normal_rotation(const Vec3& normal) {
  if (std::abs(normal.norm() - 1.0) > 1e-8) {
    throw ValidationError("normal_rotation: non-unit normal (|n| = " +
                          std::to_string(normal.norm()) + ")");
  }
  return rotation_operator(matrix_to_euler(axis_frame(normal)));
}

OdecoVec boundary_tensor(const Vec3& normal, double theta_z,
                         const Vec3& lambda) {
  Vec15 f = canonical_tensor(lambda);
  zrot_apply(theta_z, f);
  return normal_rotation(normal) * f;
}

std::pair<Vec3, Vec3> from_symmetric_matrix(const Mat3& sym,
                                            const Mat3* prev_frame) {
  if ((sym - sym.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ValidationError("from_symmetric_matrix: matrix not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (sym + sym.transpose()));
  // Eigen returns ascending eigenvalues; we want descending.
  Vec3 lambda;
  Mat3 frame;
  for (int k = 0; k < 3; ++k) {
    lambda[k] = es.eigenvalues()[2 - k];
    frame.col(k) = es.eigenvectors().col(2 - k);
  }

  const Mat3 ref = prev_frame ? *prev_frame : Mat3::Identity();
  const double tie_tol =
      1e-9 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  // Within groups of (near-)equal eigenvalues the eigenbasis is free; align
  // it with the reference frame so initialization fields stay continuous.
  for (int k = 0; k < 3;) {
    int j = k + 1;
    while (j < 3 && std::abs(lambda[j] - lambda[k]) <= tie_tol) ++j;
    if (j - k == 3) {
      frame = ref;
    } else if (j - k == 2) {
      // Rotate the 2D eigenspace to best match the reference columns.
      const Vec3 a = frame.col(k), b = frame.col(j - 1);
      const Vec3 r = ref.col(k);
      const double ca = r.dot(a), cb = r.dot(b);
      const double n = std::hypot(ca, cb);
      if (n > 1e-12) {
        const Vec3 na = (ca * a + cb * b) / n;
        Vec3 nb = b - na.dot(b) * na;
        nb -= na.dot(nb) * na;
        if (nb.norm() > 1e-12) {
          nb.normalize();
          if (ref.col(j - 1).dot(nb) < 0) nb = -nb;
          frame.col(k) = na;
          frame.col(j - 1) = nb;
        }
      }
    }
    k = j;
  }
  // Prefer the sign closest to the reference, then force right-handedness.
  for (int k = 0; k < 3; ++k) {
    if (ref.col(k).dot(frame.col(k)) < 0) frame.col(k) = -frame.col(k);
  }
  if (frame.determinant() < 0) frame.col(2) = -frame.col(2);

  return {matrix_to_euler(frame), lambda};
}

double evaluate_polynomial(const OdecoVec& f, const Vec3& dir) {
  return f.dot(sh_basis(dir));
}

Mat3 glyph_frame(const Vec3& theta, const Vec3& lambda) {
  return euler_to_matrix(theta) * lambda.asDiagonal();
}

Mat3 glyph_frame_axis(const Vec3& axis, double theta_z, const Vec3& lambda) {
  const double cz = std::cos(theta_z), sz = std::sin(theta_z);
  Mat3 rz;
  rz << cz, -sz, 0, sz, cz, 0, 0, 0, 1;
  return axis_frame(axis) * rz * lambda.asDiagonal();
}

Mat3 glyph_matrix(const Mat3& frame, const Vec3& lambda) {
  const Mat3 out = frame * lambda.asDiagonal() * frame.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace odeco
