#include "odeco/sh_tables.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <vector>

namespace odeco {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Orthonormal real SH, bands 0/2/4, as polynomials on the unit sphere.
// Index layout matches kBand*Offset: 0 | m=-2..2 | m=-4..4.
void sh_eval(double x, double y, double z, double* out) {
  const double x2 = x * x, y2 = y * y, z2 = z * z;

  out[0] = 0.5 * std::sqrt(1.0 / kPi);

  const double c22 = 0.5 * std::sqrt(15.0 / kPi);
  out[1] = c22 * x * y;                                    // m=-2
  out[2] = c22 * y * z;                                    // m=-1
  out[3] = 0.25 * std::sqrt(5.0 / kPi) * (3.0 * z2 - 1.0); // m=0
  out[4] = c22 * x * z;                                    // m=1
  out[5] = 0.25 * std::sqrt(15.0 / kPi) * (x2 - y2);       // m=2

  const double c44a = 0.75 * std::sqrt(35.0 / kPi);
  const double c44b = 0.75 * std::sqrt(35.0 / (2.0 * kPi));
  const double c44c = 0.75 * std::sqrt(5.0 / kPi);
  const double c44d = 0.75 * std::sqrt(5.0 / (2.0 * kPi));
  out[6] = c44a * x * y * (x2 - y2);                        // m=-4
  out[7] = c44b * y * z * (3.0 * x2 - y2);                  // m=-3
  out[8] = c44c * x * y * (7.0 * z2 - 1.0);                 // m=-2
  out[9] = c44d * y * z * (7.0 * z2 - 3.0);                 // m=-1
  out[10] = (3.0 / 16.0) * std::sqrt(1.0 / kPi) *
            (35.0 * z2 * z2 - 30.0 * z2 + 3.0);             // m=0
  out[11] = c44d * x * z * (7.0 * z2 - 3.0);                // m=1
  out[12] = (3.0 / 8.0) * std::sqrt(5.0 / kPi) * (x2 - y2) * (7.0 * z2 - 1.0);
  out[13] = c44b * x * z * (x2 - 3.0 * y2);                 // m=3
  out[14] = (3.0 / 16.0) * std::sqrt(35.0 / kPi) *
            (x2 * x2 - 6.0 * x2 * y2 + y2 * y2);            // m=4
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

struct SphereQuadrature {
  std::vector<Vec3> dirs;
  std::vector<double> weights;
};

// Product rule: 64 Gauss-Legendre nodes in cos(theta) x 128 uniform nodes
// in phi (8192 points). Exact to round-off for the degree-8 integrands that
// arise from products of band-4 harmonics.
const SphereQuadrature& sphere_quadrature() {
  static const SphereQuadrature quad = [] {
    SphereQuadrature q;
    const int n_theta = 64, n_phi = 128;
    std::vector<double> nodes, weights;
    gauss_legendre(n_theta, nodes, weights);
    q.dirs.reserve(n_theta * n_phi);
    q.weights.reserve(n_theta * n_phi);
    const double dphi = 2.0 * kPi / n_phi;
    for (int i = 0; i < n_theta; ++i) {
      const double u = nodes[i];            // cos(theta)
      const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
      for (int j = 0; j < n_phi; ++j) {
        const double phi = dphi * j;
        q.dirs.emplace_back(s * std::cos(phi), s * std::sin(phi), u);
        q.weights.push_back(weights[i] * dphi);
      }
    }
    return q;
  }();
  return quad;
}

Vec15 project_function(const std::vector<double>& values) {
  const auto& q = sphere_quadrature();
  Vec15 out = Vec15::Zero();
  double basis[kCoeffCount];
  for (std::size_t p = 0; p < q.dirs.size(); ++p) {
    const Vec3& d = q.dirs[p];
    sh_eval(d.x(), d.y(), d.z(), basis);
    const double wv = q.weights[p] * values[p];
    for (int k = 0; k < kCoeffCount; ++k) out[k] += wv * basis[k];
  }
  return out;
}

Mat3 rot_x(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

Mat3 rot_y(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

}  // namespace

Vec15 sh_basis(const Vec3& dir) {
  Vec15 out;
  sh_eval(dir.x(), dir.y(), dir.z(), out.data());
  return out;
}

Mat15 coeff_rotation_numeric(const Mat3& rot) {
  // (R.f)(d) = f(R^T d), so column k projects Y_k(R^T d) onto the basis.
  const auto& q = sphere_quadrature();
  Mat15 out = Mat15::Zero();
  double basis[kCoeffCount], rotated[kCoeffCount];
  const Mat3 rt = rot.transpose();
  for (std::size_t p = 0; p < q.dirs.size(); ++p) {
    const Vec3& d = q.dirs[p];
    sh_eval(d.x(), d.y(), d.z(), basis);
    const Vec3 rd = rt * d;
    sh_eval(rd.x(), rd.y(), rd.z(), rotated);
    const double w = q.weights[p];
    for (int k = 0; k < kCoeffCount; ++k) {
      const double wrk = w * rotated[k];
      for (int j = 0; j < kCoeffCount; ++j) out(j, k) += basis[j] * wrk;
    }
  }
  return out;
}

void zrot_apply(double angle, Vec15& coeffs) {
  auto mix_pair = [&](int offset, int l, int m) {
    const int ip = offset + l + m;
    const int in = offset + l - m;
    const double c = std::cos(m * angle), s = std::sin(m * angle);
    const double cp = coeffs[ip], cn = coeffs[in];
    coeffs[ip] = c * cp - s * cn;
    coeffs[in] = s * cp + c * cn;
  };
  for (int m = 1; m <= 2; ++m) mix_pair(kBand2Offset, 2, m);
  for (int m = 1; m <= 4; ++m) mix_pair(kBand4Offset, 4, m);
}

Mat15 zrot_matrix(double angle) {
  Mat15 out = Mat15::Zero();
  out(0, 0) = 1.0;
  auto fill = [&](int offset, int l) {
    out(offset + l, offset + l) = 1.0;
    for (int m = 1; m <= l; ++m) {
      const int ip = offset + l + m;
      const int in = offset + l - m;
      const double c = std::cos(m * angle), s = std::sin(m * angle);
      out(ip, ip) = c;
      out(ip, in) = -s;
      out(in, ip) = s;
      out(in, in) = c;
    }
  };
  fill(kBand2Offset, 2);
  fill(kBand4Offset, 4);
  return out;
}

ShTables build_tables() {
  ShTables t;

  // Lz from the analytic derivative of the z-rotation at angle 0.
  t.Lz = Mat15::Zero();
  auto lz_pair = [&](int offset, int l, int m) {
    const int ip = offset + l + m;
    const int in = offset + l - m;
    t.Lz(ip, in) = -static_cast<double>(m);
    t.Lz(in, ip) = static_cast<double>(m);
  };
  for (int m = 1; m <= 2; ++m) lz_pair(kBand2Offset, 2, m);
  for (int m = 1; m <= 4; ++m) lz_pair(kBand4Offset, 4, m);

  // R_x(a) = R_y(90) R_z(a) R_y(-90) and R_y(a) = R_x(-90) R_z(a) R_x(90),
  // so the generators follow by conjugating Lz with two fixed operators.
  // Rotations never mix SH bands; quadrature round-off outside the
  // (1,5,9) diagonal blocks is snapped to exact zero.
  // Quadrature round-off is snapped away: off-band entries are structural
  // zeros, and each band block is polar-projected onto the nearest
  // orthogonal matrix.
  auto snap_blocks = [](Mat15& m) {
    Mat15 out = Mat15::Zero();
    out(0, 0) = (m(0, 0) > 0) ? 1.0 : -1.0;
    auto polar = [&]<int N>(int offset, std::integral_constant<int, N>) {
      Eigen::Matrix<double, N, N> b = m.template block<N, N>(offset, offset);
      Eigen::JacobiSVD<Eigen::Matrix<double, N, N>> svd(
          b, Eigen::ComputeFullU | Eigen::ComputeFullV);
      out.template block<N, N>(offset, offset) =
          svd.matrixU() * svd.matrixV().transpose();
    };
    polar(kBand2Offset, std::integral_constant<int, 5>{});
    polar(kBand4Offset, std::integral_constant<int, 9>{});
    m = out;
  };
  t.conj_y90 = coeff_rotation_numeric(rot_y(0.5 * kPi));
  t.conj_xm90 = coeff_rotation_numeric(rot_x(-0.5 * kPi));
  snap_blocks(t.conj_y90);
  snap_blocks(t.conj_xm90);
  t.Lx = t.conj_y90 * t.Lz * t.conj_y90.transpose();
  t.Ly = t.conj_xm90 * t.Lz * t.conj_xm90.transpose();
  // Generators are exactly antisymmetric; average away round-off.
  t.Lx = 0.5 * (t.Lx - t.Lx.transpose()).eval();
  t.Ly = 0.5 * (t.Ly - t.Ly.transpose()).eval();

  // Stretch basis: columns are the projections of x^4, y^4, z^4.
  const auto& q = sphere_quadrature();
  std::vector<double> vx(q.dirs.size()), vy(q.dirs.size()), vz(q.dirs.size());
  for (std::size_t p = 0; p < q.dirs.size(); ++p) {
    const Vec3& d = q.dirs[p];
    vx[p] = std::pow(d.x(), 4);
    vy[p] = std::pow(d.y(), 4);
    vz[p] = std::pow(d.z(), 4);
  }
  t.stretch_basis.col(0) = project_function(vx);
  t.stretch_basis.col(1) = project_function(vy);
  t.stretch_basis.col(2) = project_function(vz);

  return t;
}

std::string table_cache_path() {
  if (const char* p = std::getenv("ODECO_TABLE_CACHE")) return p;
  std::string base;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME")) {
    base = xdg;
  } else if (const char* home = std::getenv("HOME")) {
    base = std::string(home) + "/.cache";
  } else {
    return {};
  }
  return base + "/odecofield/tables_v1.bin";
}

namespace {
constexpr std::uint64_t kMagic = 0x4f4445434f544231ull;  // "ODECOTB1"
constexpr std::uint32_t kVersion = 1;
}  // namespace

bool save_tables(const ShTables& t, const std::string& path) {
  if (path.empty()) return false;
  std::error_code ec;
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path(), ec);
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) return false;
  bool ok = std::fwrite(&kMagic, sizeof kMagic, 1, f) == 1 &&
            std::fwrite(&kVersion, sizeof kVersion, 1, f) == 1;
  auto write_mat = [&](const double* data, std::size_t n) {
    ok = ok && std::fwrite(data, sizeof(double), n, f) == n;
  };
  write_mat(t.Lx.data(), kCoeffCount * kCoeffCount);
  write_mat(t.Ly.data(), kCoeffCount * kCoeffCount);
  write_mat(t.Lz.data(), kCoeffCount * kCoeffCount);
  write_mat(t.conj_y90.data(), kCoeffCount * kCoeffCount);
  write_mat(t.conj_xm90.data(), kCoeffCount * kCoeffCount);
  write_mat(t.stretch_basis.data(), kCoeffCount * 3);
  std::fclose(f);
  return ok;
}

bool load_tables(ShTables& t, const std::string& path) {
  if (path.empty()) return false;
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) return false;
  std::uint64_t magic = 0;
  std::uint32_t version = 0;
  bool ok = std::fread(&magic, sizeof magic, 1, f) == 1 &&
            std::fread(&version, sizeof version, 1, f) == 1 &&
            magic == kMagic && version == kVersion;
  auto read_mat = [&](double* data, std::size_t n) {
    ok = ok && std::fread(data, sizeof(double), n, f) == n;
  };
  read_mat(t.Lx.data(), kCoeffCount * kCoeffCount);
  read_mat(t.Ly.data(), kCoeffCount * kCoeffCount);
  read_mat(t.Lz.data(), kCoeffCount * kCoeffCount);
  read_mat(t.conj_y90.data(), kCoeffCount * kCoeffCount);
  read_mat(t.conj_xm90.data(), kCoeffCount * kCoeffCount);
  read_mat(t.stretch_basis.data(), kCoeffCount * 3);
  std::fclose(f);
  return ok;
}

const ShTables& tables() {
  static const ShTables t = [] {
    ShTables tab;
    const std::string path = table_cache_path();
    if (load_tables(tab, path)) return tab;
    tab = build_tables();
    save_tables(tab, path);  // best effort
    return tab;
  }();
  return t;
}

}  // namespace odeco
