#include "odeco/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "odeco/types.hpp"

namespace odeco {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Pair {
  std::vector<double> s, y;
  double rho;
};

struct LinePoint {
  std::vector<double> x;
  std::vector<double> g;
  double f;
  double dg;  // directional derivative g . p
};

}  // namespace

LbfgsResult lbfgs_minimize(const LbfgsObjective& objective,
                           std::vector<double> x0, const LbfgsOptions& options,
                           const LbfgsProjection* projection) {
  const std::size_t n = x0.size();
  LbfgsResult out;
  if (projection) (*projection)(x0);

  std::vector<double> g(n);
  double f = objective(x0, &g);
  if (!std::isfinite(f))
    throw SolverError("lbfgs: objective not finite at the start point");

  out.x = x0;
  out.f = f;
  if (n == 0) {
    out.converged = true;
    return out;
  }

  std::deque<Pair> history;
  std::vector<double> x = std::move(x0);
  std::vector<double> p(n), q(n);

  auto eval_at = [&](const std::vector<double>& base,
                     const std::vector<double>& dir, double alpha,
                     LinePoint& pt) {
    pt.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) pt.x[i] = base[i] + alpha * dir[i];
    if (projection) (*projection)(pt.x);
    pt.g.resize(n);
    pt.f = objective(pt.x, &pt.g);
    pt.dg = dot(pt.g, dir);
  };

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const double gnorm = inf_norm(g);
    if (gnorm <= 1e-13 * std::max(1.0, std::abs(f))) {
      out.converged = true;
      break;
    }

    // two-loop recursion
    q = g;
    std::vector<double> alpha_hist(history.size());
    for (int k = static_cast<int>(history.size()) - 1; k >= 0; --k) {
      const Pair& h = history[k];
      alpha_hist[k] = h.rho * dot(h.s, q);
      for (std::size_t i = 0; i < n; ++i) q[i] -= alpha_hist[k] * h.y[i];
    }
    double h0 = 1.0;
    if (!history.empty()) {
      const Pair& last = history.back();
      h0 = dot(last.s, last.y) / std::max(dot(last.y, last.y), 1e-300);
    }
    for (double& v : q) v *= h0;
    for (std::size_t k = 0; k < history.size(); ++k) {
      const Pair& h = history[k];
      const double beta = h.rho * dot(h.y, q);
      for (std::size_t i = 0; i < n; ++i)
        q[i] += (alpha_hist[k] - beta) * h.s[i];
    }
    for (std::size_t i = 0; i < n; ++i) p[i] = -q[i];

    double dg0 = dot(g, p);
    if (!(dg0 < 0.0)) {
      // Not a descent direction (history gone stale): restart on steepest
      // descent.
      history.clear();
      for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
      dg0 = dot(g, p);
      if (!(dg0 < 0.0)) break;  // zero gradient
    }

    // Strong Wolfe line search (bracket + zoom).
    const double f0 = f;
    const double wolfe_c1 = options.c1 * dg0;
    const double wolfe_c2 = options.c2 * std::abs(dg0);
    double alpha_prev = 0.0, f_prev = f0;
    double alpha = (history.empty() && iter == 0)
                       ? std::min(1.0, 1.0 / std::max(gnorm, 1e-12))
                       : 1.0;
    LinePoint cand;
    bool accepted = false;
    double alpha_lo = 0.0, alpha_hi = 0.0;
    double f_lo = f0;
    bool bracketed = false;

    for (int ls = 0; ls < 20 && !accepted && !bracketed; ++ls) {
      eval_at(x, p, alpha, cand);
      if (!std::isfinite(cand.f) || cand.f > f0 + alpha * wolfe_c1 ||
          (ls > 0 && cand.f >= f_prev)) {
        alpha_lo = alpha_prev;
        f_lo = f_prev;
        alpha_hi = alpha;
        bracketed = true;
        break;
      }
      if (std::abs(cand.dg) <= wolfe_c2) {
        accepted = true;
        break;
      }
      if (cand.dg >= 0.0) {
        alpha_lo = alpha;
        f_lo = cand.f;
        alpha_hi = alpha_prev;
        bracketed = true;
        break;
      }
      alpha_prev = alpha;
      f_prev = cand.f;
      alpha *= 2.0;
      if (alpha > 1e8) break;
    }

    if (!accepted && bracketed) {
      // zoom
      for (int z = 0; z < 30; ++z) {
        const double mid = 0.5 * (alpha_lo + alpha_hi);
        if (std::abs(alpha_hi - alpha_lo) <
            1e-14 * std::max(1.0, std::abs(alpha_lo)))
          break;
        eval_at(x, p, mid, cand);
        if (!std::isfinite(cand.f) || cand.f > f0 + mid * wolfe_c1 ||
            cand.f >= f_lo) {
          alpha_hi = mid;
          continue;
        }
        if (std::abs(cand.dg) <= wolfe_c2) {
          accepted = true;
          break;
        }
        if (cand.dg * (alpha_hi - alpha_lo) >= 0.0) alpha_hi = alpha_lo;
        alpha_lo = mid;
        f_lo = cand.f;
      }
      // Fall back to plain sufficient decrease if curvature never held.
      if (!accepted && std::isfinite(cand.f) && cand.f < f0) accepted = true;
    }

    if (!accepted || !(cand.f < f0)) {
      out.line_search_failed = true;
      break;
    }

    // Curvature pair from the accepted step.
    Pair pair;
    pair.s.resize(n);
    pair.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = cand.x[i] - x[i];
      pair.y[i] = cand.g[i] - g[i];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-12 * std::sqrt(dot(pair.s, pair.s)) *
                 std::sqrt(dot(pair.y, pair.y))) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > options.memory)
        history.pop_front();
    }

    x = cand.x;
    g = cand.g;
    const double df = f - cand.f;
    f = cand.f;
    out.iterations = iter + 1;
    if (f < out.f) {
      out.f = f;
      out.x = x;
    }
    if (df / std::max(std::abs(f), 1e-300) < options.rel_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace odeco
