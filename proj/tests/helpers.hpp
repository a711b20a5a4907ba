#pragma once

#include <cmath>
#include <random>

#include "odeco/algebra.hpp"
#include "odeco/types.hpp"

namespace odeco::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed = 20240601ull) {
  return std::mt19937_64(seed);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_euler(std::mt19937_64& rng) {
  const double pi = 3.14159265358979323846;
  return Vec3(uniform(rng, -pi, pi), uniform(rng, -pi, pi),
              uniform(rng, -pi, pi));
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  while (v.norm() < 1e-6) v = Vec3(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Vec3 random_lambda(std::mt19937_64& rng, double lo = 0.5,
                          double hi = 4.0) {
  return Vec3(uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi));
}

/// Relative discrepancy with an absolute floor of 1 (so true zeros pass).
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(a) + std::abs(b));
}

}  // namespace odeco::testing
