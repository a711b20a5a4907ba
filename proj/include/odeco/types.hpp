#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace odeco {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Number of real spherical-harmonic coefficients in bands {0, 2, 4}.
inline constexpr int kCoeffCount = 15;

/// Contiguous band layout inside a coefficient vector: band 0 occupies
/// [0,1), band 2 [1,6) with m = -2..2, band 4 [6,15) with m = -4..4.
inline constexpr int kBand0Offset = 0;
inline constexpr int kBand2Offset = 1;
inline constexpr int kBand4Offset = 6;

using Vec15 = Eigen::Matrix<double, kCoeffCount, 1>;
using Mat15 = Eigen::Matrix<double, kCoeffCount, kCoeffCount>;
using Mat15x3 = Eigen::Matrix<double, kCoeffCount, 3>;

/// Error categories map to CLI exit codes (io=2, validation=3, solver=4).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace odeco
