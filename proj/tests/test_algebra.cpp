#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "odeco/algebra.hpp"

using namespace odeco;
using namespace odeco::testing;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double stretch_poly(const Vec3& lambda, const Vec3& d) {
  return lambda.x() * std::pow(d.x(), 4) + lambda.y() * std::pow(d.y(), 4) +
         lambda.z() * std::pow(d.z(), 4);
}

/// All 24 rotations of the octahedral group as signed permutations.
std::vector<Mat3> octahedral_rotations() {
  std::vector<Mat3> out;
  int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (auto& p : perm) {
    for (int sx = -1; sx <= 1; sx += 2)
      for (int sy = -1; sy <= 1; sy += 2)
        for (int sz = -1; sz <= 1; sz += 2) {
          Mat3 m = Mat3::Zero();
          m(0, p[0]) = sx;
          m(1, p[1]) = sy;
          m(2, p[2]) = sz;
          if (m.determinant() > 0.5) out.push_back(m);
        }
  }
  return out;
}
}  // namespace

TEST_CASE("rotation_operator at zero is the identity") {
  CHECK((rotation_operator(Vec3::Zero()) - Mat15::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("rotation operators are orthogonal and band-block exact") {
  std::mt19937_64 rng = make_rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const Mat15 r = rotation_operator(random_euler(rng));
    CHECK((r.transpose() * r - Mat15::Identity()).cwiseAbs().maxCoeff() <
          1e-9);
    for (int j = 0; j < kCoeffCount; ++j)
      for (int k = 0; k < kCoeffCount; ++k) {
        const bool same_band =
            (j == 0 && k == 0) ||
            (j >= kBand2Offset && j < kBand4Offset && k >= kBand2Offset &&
             k < kBand4Offset) ||
            (j >= kBand4Offset && k >= kBand4Offset);
        if (!same_band) CHECK(r(j, k) == 0.0);
      }
  }
}

TEST_CASE("coefficient rotation is equivariant with 3-space rotation") {
  std::mt19937_64 rng = make_rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    const Vec3 theta = random_euler(rng);
    const Vec3 lambda = random_lambda(rng);
    const Vec3 d = random_unit(rng);
    const Vec15 f = canonical_tensor(lambda);
    const double lhs = evaluate_polynomial(rotation_operator(theta) * f, d);
    const double rhs =
        evaluate_polynomial(f, euler_to_matrix(theta).transpose() * d);
    CHECK(std::abs(lhs - rhs) < 1e-8);
  }
}

TEST_CASE("rotation_operator matches the numeric projection oracle") {
  std::mt19937_64 rng = make_rng(13);
  for (int rep = 0; rep < 3; ++rep) {
    const Vec3 theta = random_euler(rng);
    const Mat15 fast = rotation_operator(theta);
    const Mat15 slow = coeff_rotation_numeric(euler_to_matrix(theta));
    CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("canonical tensor reconstructs the stretch polynomial pointwise") {
  std::mt19937_64 rng = make_rng(14);
  CHECK(canonical_tensor(Vec3::Zero()).norm() == 0.0);
  for (int rep = 0; rep < 50; ++rep) {
    const Vec3 lambda = random_lambda(rng, -2.0, 5.0);
    const Vec15 f = canonical_tensor(lambda);
    for (int k = 0; k < 10; ++k) {
      const Vec3 d = random_unit(rng);
      CHECK(std::abs(evaluate_polynomial(f, d) - stretch_poly(lambda, d)) <
            1e-10);
    }
  }
  // lambda = (1,0,0): value 1 along x, 0 along z.
  const Vec15 fx = canonical_tensor(Vec3(1, 0, 0));
  CHECK(std::abs(evaluate_polynomial(fx, Vec3(1, 0, 0)) - 1.0) < 1e-10);
  CHECK(std::abs(evaluate_polynomial(fx, Vec3(0, 0, 1))) < 1e-10);
}

TEST_CASE("isotropic canonical tensor has an empty band 2") {
  const Vec15 f = canonical_tensor(Vec3(1, 1, 1));
  for (int k = kBand2Offset; k < kBand4Offset; ++k) {
    CHECK(std::abs(f[k]) < 1e-12);
  }
}

TEST_CASE("nonnegative lambda gives a nonnegative polynomial on the sphere") {
  std::mt19937_64 rng = make_rng(15);
  for (int rep = 0; rep < 20; ++rep) {
    const Vec3 lambda = random_lambda(rng, 0.0, 5.0);
    const Vec15 f = canonical_tensor(lambda);
    for (int k = 0; k < 50; ++k) {
      CHECK(evaluate_polynomial(f, random_unit(rng)) > -1e-10);
    }
  }
}

TEST_CASE("z quarter turn swaps the x and y stretches") {
  const Vec15 rotated =
      rotation_operator(Vec3(0, 0, 0.5 * kPi)) * canonical_tensor(Vec3(2, 1, 1));
  const Vec15 expected = canonical_tensor(Vec3(1, 2, 1));
  CHECK((rotated - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("signed axis permutations permute the stretches") {
  std::mt19937_64 rng = make_rng(16);
  const Vec3 lambda = random_lambda(rng);
  for (const Mat3& p : octahedral_rotations()) {
    const Vec15 lhs =
        rotation_operator(matrix_to_euler(p)) * canonical_tensor(lambda);
    // Rotating f_hat by P moves the lobe on axis k to axis P e_k, so the
    // new stretch on axis j is lambda at P^T e_j.
    const Vec3 permuted = p.cwiseAbs() * lambda;
    CHECK((lhs - canonical_tensor(permuted)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("octahedral rotations fix the isotropic tensor") {
  const Vec15 f = canonical_tensor(Vec3(1.7, 1.7, 1.7));
  const auto rots = octahedral_rotations();
  CHECK(rots.size() == 24);
  for (const Mat3& p : rots) {
    const Vec15 g = rotation_operator(matrix_to_euler(p)) * f;
    CHECK((g - f).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("rotations preserve the coefficient norm") {
  std::mt19937_64 rng = make_rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const Vec15 f = canonical_tensor(random_lambda(rng));
    const Mat15 r = rotation_operator(random_euler(rng));
    CHECK(std::abs((r * f).norm() - f.norm()) < 1e-10 * std::max(1.0, f.norm()));
  }
}

TEST_CASE("euler round trip") {
  std::mt19937_64 rng = make_rng(18);
  for (int rep = 0; rep < 200; ++rep) {
    const Vec3 theta = random_euler(rng);
    const Mat3 r = euler_to_matrix(theta);
    const Mat3 back = euler_to_matrix(matrix_to_euler(r));
    CHECK((r - back).cwiseAbs().maxCoeff() < 1e-10);
  }
  // gimbal-locked matrices reconstruct too
  const Mat3 g = euler_to_matrix(Vec3(0.3, 0.5 * kPi, -0.2));
  CHECK((euler_to_matrix(matrix_to_euler(g)) - g).cwiseAbs().maxCoeff() <
        1e-9);
}

TEST_CASE("normal_rotation basics") {
  CHECK((normal_rotation(Vec3(0, 0, 1)) - Mat15::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK_THROWS_AS(normal_rotation(Vec3(0, 0, 2)), ValidationError);

  // n = x: the lambda_z lobe lands on x.
  const Vec15 f = normal_rotation(Vec3(1, 0, 0)) * canonical_tensor(Vec3(1, 1, 2));
  std::mt19937_64 rng = make_rng(19);
  for (int k = 0; k < 30; ++k) {
    const Vec3 d = random_unit(rng);
    CHECK(std::abs(evaluate_polynomial(f, d) -
                   stretch_poly(Vec3(2, 1, 1), d)) < 1e-9);
  }

  // n = -z maps to the fixed pi-rotation about x; applying twice restores.
  const Mat15 r = normal_rotation(Vec3(0, 0, -1));
  const Vec15 g = canonical_tensor(Vec3(3, 2, 1));
  CHECK((r * (r * g) - g).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("normal_rotation sends z to n deterministically") {
  std::mt19937_64 rng = make_rng(20);
  for (int rep = 0; rep < 30; ++rep) {
    const Vec3 n = random_unit(rng);
    const Mat3 frame = axis_frame(n);
    CHECK((frame.col(2) - n).norm() < 1e-12);
    CHECK(std::abs(frame.determinant() - 1.0) < 1e-12);
    // major lobe of a z-heavy tensor lands along n for any theta_z
    const Vec15 f = boundary_tensor(n, uniform(rng, -kPi, kPi), Vec3(1, 1, 6));
    double best = -1e30;
    Vec3 best_dir = Vec3::Zero();
    for (int k = 0; k < 4000; ++k) {
      const Vec3 d = random_unit(rng);
      const double v = evaluate_polynomial(f, d);
      if (v > best) {
        best = v;
        best_dir = d;
      }
    }
    CHECK(std::abs(best_dir.dot(n)) > 0.95);
  }
}

TEST_CASE("boundary tensor composition order matches the z-up case") {
  const Vec3 lam(2, 1, 1);
  CHECK((boundary_tensor(Vec3(0, 0, 1), 0.0, lam) - canonical_tensor(lam))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK((boundary_tensor(Vec3(0, 0, 1), 0.5 * kPi, lam) -
         canonical_tensor(Vec3(1, 2, 1)))
            .cwiseAbs()
            .maxCoeff() < 1e-9);
}

TEST_CASE("boundary tensor is pi/2-periodic in the spin when lx = ly") {
  // x^4 + y^4 is invariant under quarter turns (not under arbitrary spins),
  // and the value along the normal never depends on the spin.
  std::mt19937_64 rng = make_rng(21);
  const Vec3 n = random_unit(rng);
  const Vec3 lam(1, 1, 3.5);
  const Vec15 base = boundary_tensor(n, 0.0, lam);
  for (int k = 1; k <= 4; ++k) {
    const Vec15 turned = boundary_tensor(n, k * 0.5 * kPi, lam);
    CHECK((turned - base).cwiseAbs().maxCoeff() < 1e-9);
  }
  for (int k = 0; k < 8; ++k) {
    const double tz = uniform(rng, -kPi, kPi);
    const Vec15 f = boundary_tensor(n, tz, lam);
    CHECK(std::abs(evaluate_polynomial(f, n) -
                   evaluate_polynomial(base, n)) < 1e-9);
  }
}

TEST_CASE("from_symmetric_matrix canonical cases") {
  auto [theta_i, lam_i] = from_symmetric_matrix(Mat3::Identity());
  CHECK((lam_i - Vec3(1, 1, 1)).norm() < 1e-12);
  CHECK(theta_i.norm() < 1e-12);

  Mat3 d = Vec3(2, 1, 1).asDiagonal();
  auto [theta_d, lam_d] = from_symmetric_matrix(d);
  CHECK((lam_d - Vec3(2, 1, 1)).norm() < 1e-12);
  const Vec15 f = rotation_operator(theta_d) * canonical_tensor(lam_d);
  // major lobe along x
  CHECK(std::abs(evaluate_polynomial(f, Vec3(1, 0, 0)) - 2.0) < 1e-8);
}

TEST_CASE("from_symmetric_matrix round trip on random matrices") {
  std::mt19937_64 rng = make_rng(22);
  for (int rep = 0; rep < 100; ++rep) {
    Mat3 a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = uniform(rng, -2, 2);
    const Mat3 s = 0.5 * (a + a.transpose());
    auto [theta, lam] = from_symmetric_matrix(s);
    CHECK(lam[0] >= lam[1]);
    CHECK(lam[1] >= lam[2]);
    const Mat3 r = euler_to_matrix(theta);
    const Mat3 back = r * lam.asDiagonal() * r.transpose();
    CHECK((back - s).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("from_symmetric_matrix rejects asymmetric input") {
  Mat3 bad = Mat3::Identity();
  bad(0, 1) = 0.5;
  CHECK_THROWS_AS(from_symmetric_matrix(bad), ValidationError);
}

TEST_CASE("evaluate_polynomial is linear") {
  std::mt19937_64 rng = make_rng(23);
  const Vec15 f = canonical_tensor(random_lambda(rng));
  const Vec15 g = rotation_operator(random_euler(rng)) *
                  canonical_tensor(random_lambda(rng));
  const Vec3 d = random_unit(rng);
  const double a = 1.7, b = -0.4;
  CHECK(std::abs(evaluate_polynomial(a * f + b * g, d) -
                 (a * evaluate_polynomial(f, d) +
                  b * evaluate_polynomial(g, d))) < 1e-12);
}

TEST_CASE("glyph frame axes") {
  const Mat3 g = glyph_frame(Vec3::Zero(), Vec3(2, 1, 1));
  CHECK((g.col(0) - Vec3(2, 0, 0)).norm() < 1e-14);
  CHECK((g.col(1) - Vec3(0, 1, 0)).norm() < 1e-14);
  CHECK((g.col(2) - Vec3(0, 0, 1)).norm() < 1e-14);

  std::mt19937_64 rng = make_rng(24);
  for (int rep = 0; rep < 20; ++rep) {
    const Mat3 axes = glyph_frame(random_euler(rng), random_lambda(rng));
    CHECK(std::abs(axes.col(0).dot(axes.col(1))) < 1e-9 * axes.col(0).norm() *
                                                        axes.col(1).norm());
    CHECK(std::abs(axes.col(0).dot(axes.col(2))) < 1e-9 * axes.col(0).norm() *
                                                        axes.col(2).norm());
  }
}

TEST_CASE("glyph major axis matches the polynomial argmax") {
  std::mt19937_64 rng = make_rng(25);
  for (int rep = 0; rep < 10; ++rep) {
    const Vec3 theta = random_euler(rng);
    const Vec3 lambda(4.0, 1.5, 1.0);  // strict max on x
    const Vec15 f = rotation_operator(theta) * canonical_tensor(lambda);
    const Vec3 major = glyph_frame(theta, lambda).col(0).normalized();
    double best = -1e30;
    Vec3 best_dir = Vec3::Zero();
    for (int k = 0; k < 20000; ++k) {
      const Vec3 d = random_unit(rng);
      const double v = evaluate_polynomial(f, d);
      if (v > best) {
        best = v;
        best_dir = d;
      }
    }
    CHECK(std::abs(best_dir.dot(major)) > 0.98);
  }
}
