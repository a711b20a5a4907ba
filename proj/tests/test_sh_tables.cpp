#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "odeco/sh_tables.hpp"

using namespace odeco;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Independent generator oracle: coefficients of the rotated function are
// recovered by least squares from pointwise samples, never through the
// operator tables under test. f_rot(d) = f(R^T d).
Vec15 fit_rotated_coeffs(const Vec15& coeffs, const Mat3& rot) {
  std::mt19937_64 rng = testing::make_rng(77);
  const int n = 400;
  Eigen::MatrixXd basis(n, kCoeffCount);
  Eigen::VectorXd rhs(n);
  for (int p = 0; p < n; ++p) {
    const Vec3 d = testing::random_unit(rng);
    basis.row(p) = sh_basis(d).transpose();
    rhs[p] = coeffs.dot(sh_basis(rot.transpose() * d));
  }
  return basis.colPivHouseholderQr().solve(rhs);
}

Mat3 rot_about(int axis, double a) {
  Mat3 m = Mat3::Identity();
  const double c = std::cos(a), s = std::sin(a);
  const int u = (axis + 1) % 3, v = (axis + 2) % 3;
  m(u, u) = c;
  m(u, v) = -s;
  m(v, u) = s;
  m(v, v) = c;
  return m;
}

}  // namespace

TEST_CASE("real SH basis is orthonormal") {
  // The Gram matrix of the basis is coeff_rotation_numeric(I); it must be
  // the identity when the basis is orthonormal.
  const Mat15 gram = coeff_rotation_numeric(Mat3::Identity());
  CHECK((gram - Mat15::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("angular momentum operators match the finite-difference oracle") {
  const ShTables& t = tables();
  std::mt19937_64 rng = testing::make_rng(1);
  const double h = 1e-5;
  const Mat15* ops[3] = {&t.Lx, &t.Ly, &t.Lz};
  for (int axis = 0; axis < 3; ++axis) {
    Vec15 f = Vec15::Zero();
    for (int k = 0; k < kCoeffCount; ++k) f[k] = testing::uniform(rng, -1, 1);
    const Vec15 plus = fit_rotated_coeffs(f, rot_about(axis, h));
    const Vec15 minus = fit_rotated_coeffs(f, rot_about(axis, -h));
    const Vec15 fd = (plus - minus) / (2.0 * h);
    const Vec15 an = (*ops[axis]) * f;
    CHECK((fd - an).cwiseAbs().maxCoeff() < 1e-7 * std::max(1.0, an.norm()));
  }
}

TEST_CASE("Lz couples only (m,-m) pairs with magnitude |m|") {
  const Mat15& lz = tables().Lz;
  auto expect_pair = [&](int offset, int l) {
    for (int m = -l; m <= l; ++m) {
      for (int mm = -l; mm <= l; ++mm) {
        const double v = lz(offset + l + m, offset + l + mm);
        if (m == -mm && m != 0) {
          CHECK(std::abs(std::abs(v) - std::abs(m)) < 1e-14);
        } else {
          CHECK(std::abs(v) < 1e-14);
        }
      }
    }
  };
  CHECK(lz(0, 0) == 0.0);
  expect_pair(kBand2Offset, 2);
  expect_pair(kBand4Offset, 4);
}

TEST_CASE("operators are antisymmetric and block-diagonal") {
  const ShTables& t = tables();
  for (const Mat15* op : {&t.Lx, &t.Ly, &t.Lz}) {
    CHECK((*op + op->transpose()).cwiseAbs().maxCoeff() < 1e-12);
    // band-0 block zero, no cross-band coupling (exact zeros)
    CHECK((*op)(0, 0) == 0.0);
    for (int j = 0; j < kCoeffCount; ++j) {
      for (int k = 0; k < kCoeffCount; ++k) {
        const bool same_band =
            (j == 0 && k == 0) ||
            (j >= kBand2Offset && j < kBand4Offset && k >= kBand2Offset &&
             k < kBand4Offset) ||
            (j >= kBand4Offset && k >= kBand4Offset);
        if (!same_band) CHECK((*op)(j, k) == 0.0);
      }
    }
  }
}

TEST_CASE("commutators close with c = +1") {
  const ShTables& t = tables();
  CHECK((t.Lx * t.Ly - t.Ly * t.Lx - t.Lz).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((t.Ly * t.Lz - t.Lz * t.Ly - t.Lx).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((t.Lz * t.Lx - t.Lx * t.Lz - t.Ly).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("analytic z-rotation agrees with numeric projection") {
  std::mt19937_64 rng = testing::make_rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const double a = testing::uniform(rng, -kPi, kPi);
    const Mat15 num = coeff_rotation_numeric(rot_about(2, a));
    CHECK((zrot_matrix(a) - num).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("table cache round-trips bitwise") {
  const ShTables t = build_tables();
  const std::string path = "test_tables_cache.bin";
  REQUIRE(save_tables(t, path));
  ShTables back;
  REQUIRE(load_tables(back, path));
  CHECK((t.Lx - back.Lx).cwiseAbs().maxCoeff() == 0.0);
  CHECK((t.Ly - back.Ly).cwiseAbs().maxCoeff() == 0.0);
  CHECK((t.Lz - back.Lz).cwiseAbs().maxCoeff() == 0.0);
  CHECK((t.conj_y90 - back.conj_y90).cwiseAbs().maxCoeff() == 0.0);
  CHECK((t.stretch_basis - back.stretch_basis).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}
