#include <cstdint>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "odeco/kernels.hpp"

using namespace odeco;
namespace k = odeco::kernels;

namespace {

struct EdgeProblem {
  int nv = 0;
  std::vector<double> coeffs;
  std::vector<std::int32_t> a, b;
  std::vector<double> w;
};

EdgeProblem random_problem(int nv, int ne, std::uint64_t seed) {
  std::mt19937_64 rng = testing::make_rng(seed);
  EdgeProblem p;
  p.nv = nv;
  p.coeffs.resize(static_cast<std::size_t>(nv) * 15);
  for (auto& c : p.coeffs) c = testing::uniform(rng, -3.0, 3.0);
  std::uniform_int_distribution<int> vid(0, nv - 1);
  for (int e = 0; e < ne; ++e) {
    int i = vid(rng), j = vid(rng);
    if (i == j) j = (j + 1) % nv;
    p.a.push_back(i);
    p.b.push_back(j);
    p.w.push_back(testing::uniform(rng, -0.2, 2.0));
  }
  return p;
}

}  // namespace

TEST_CASE("scalar edge energy matches a brute-force double loop") {
  const EdgeProblem p = random_problem(40, 200, 5);
  std::vector<double> per_vertex(p.nv, 0.0);
  const double e = k::detail::edge_energy_scalar(
      p.coeffs.data(), p.a.data(), p.b.data(), p.w.data(), p.w.size(),
      per_vertex.data());

  double ref = 0.0;
  std::vector<double> ref_pv(p.nv, 0.0);
  for (std::size_t idx = 0; idx < p.w.size(); ++idx) {
    double d2 = 0.0;
    for (int c = 0; c < 15; ++c) {
      const double d = p.coeffs[15 * p.a[idx] + c] - p.coeffs[15 * p.b[idx] + c];
      d2 += d * d;
    }
    ref += p.w[idx] * d2;
    ref_pv[p.a[idx]] += 0.5 * p.w[idx] * d2;
    ref_pv[p.b[idx]] += 0.5 * p.w[idx] * d2;
  }
  CHECK(std::abs(e - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
  double pv_sum = 0.0;
  for (int v = 0; v < p.nv; ++v) {
    CHECK(std::abs(per_vertex[v] - ref_pv[v]) < 1e-12);
    pv_sum += per_vertex[v];
  }
  CHECK(std::abs(pv_sum - e) < 1e-9 * std::max(1.0, std::abs(e)));
}

TEST_CASE("cogradient matches finite differences of the edge energy") {
  const EdgeProblem p = random_problem(12, 40, 6);
  std::vector<double> cograd(p.coeffs.size(), 0.0);
  k::detail::edge_cogradient_scalar(p.coeffs.data(), p.a.data(), p.b.data(),
                                    p.w.data(), p.w.size(), cograd.data());
  std::vector<double> mutable_coeffs = p.coeffs;
  const double h = 1e-6;
  std::mt19937_64 rng = testing::make_rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, p.coeffs.size() - 1);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t i = pick(rng);
    mutable_coeffs[i] = p.coeffs[i] + h;
    const double ep = k::detail::edge_energy_scalar(
        mutable_coeffs.data(), p.a.data(), p.b.data(), p.w.data(), p.w.size(),
        nullptr);
    mutable_coeffs[i] = p.coeffs[i] - h;
    const double em = k::detail::edge_energy_scalar(
        mutable_coeffs.data(), p.a.data(), p.b.data(), p.w.data(), p.w.size(),
        nullptr);
    mutable_coeffs[i] = p.coeffs[i];
    const double fd = (ep - em) / (2.0 * h);
    CHECK(testing::rel_err(cograd[i], fd) < 1e-7);
  }
}

TEST_CASE("avx2 backend is equivalent to scalar") {
  if (!k::avx2_supported()) {
    MESSAGE("AVX2 not available; skipping equivalence check");
    return;
  }
  const k::Backend original = k::active_backend();
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    const EdgeProblem p = random_problem(65, 700, seed);
    std::vector<double> pv_s(p.nv, 0.0), pv_v(p.nv, 0.0);
    std::vector<double> gs(p.coeffs.size(), 0.0), gv(p.coeffs.size(), 0.0);

    k::set_backend(k::Backend::Scalar);
    const double es = k::edge_energy(p.coeffs.data(), p.a.data(), p.b.data(),
                                     p.w.data(), p.w.size(), pv_s.data());
    k::edge_cogradient(p.coeffs.data(), p.a.data(), p.b.data(), p.w.data(),
                       p.w.size(), gs.data());

    k::set_backend(k::Backend::Avx2);
    const double ev = k::edge_energy(p.coeffs.data(), p.a.data(), p.b.data(),
                                     p.w.data(), p.w.size(), pv_v.data());
    k::edge_cogradient(p.coeffs.data(), p.a.data(), p.b.data(), p.w.data(),
                       p.w.size(), gv.data());

    CHECK(std::abs(es - ev) < 1e-12 * std::max(1.0, std::abs(es)));
    for (int v = 0; v < p.nv; ++v) {
      CHECK(std::abs(pv_s[v] - pv_v[v]) <
            1e-12 * std::max(1.0, std::abs(pv_s[v])));
    }
    for (std::size_t i = 0; i < gs.size(); ++i) {
      CHECK(std::abs(gs[i] - gv[i]) < 1e-12 * std::max(1.0, std::abs(gs[i])));
    }
  }
  k::set_backend(original);
}

TEST_CASE("dispatch honors set_backend and reports a name") {
  const k::Backend original = k::active_backend();
  k::set_backend(k::Backend::Scalar);
  CHECK(k::active_backend() == k::Backend::Scalar);
  CHECK(std::string(k::backend_name(k::active_backend())) == "scalar");
  if (k::avx2_supported()) {
    k::set_backend(k::Backend::Avx2);
    CHECK(std::string(k::backend_name(k::active_backend())) == "avx2");
  }
  k::set_backend(original);
}

TEST_CASE("runs are bitwise reproducible for a fixed backend") {
  const EdgeProblem p = random_problem(30, 300, 21);
  const double e1 = k::edge_energy(p.coeffs.data(), p.a.data(), p.b.data(),
                                   p.w.data(), p.w.size(), nullptr);
  const double e2 = k::edge_energy(p.coeffs.data(), p.a.data(), p.b.data(),
                                   p.w.data(), p.w.size(), nullptr);
  CHECK(e1 == e2);
}
