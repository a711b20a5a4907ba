#pragma once

#include <functional>
#include <span>
#include <vector>

namespace odeco {

struct LbfgsOptions {
  int memory = 10;
  double rel_tol = 1e-3;   // stop when |dE| / max(|E|, tiny) < rel_tol
  int max_iters = 500;
  double c1 = 1e-4;        // Armijo
  double c2 = 0.9;         // curvature (strong Wolfe)
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;       // tolerance hit (vs. iter cap / line search)
  bool line_search_failed = false;
};

/// f(x, grad) -> value; grad (when non-null) must be filled with df/dx.
using LbfgsObjective =
    std::function<double(std::span<const double>, std::vector<double>*)>;

/// Optional feasibility projection applied to every candidate point before
/// evaluation (used for the lambda positivity floor).
using LbfgsProjection = std::function<void(std::vector<double>&)>;

/// Limited-memory BFGS (two-loop recursion) with a strong-Wolfe line
/// search. Accepted iterates have strictly decreasing f; on line-search
/// failure the best point seen is returned.
LbfgsResult lbfgs_minimize(const LbfgsObjective& objective,
                           std::vector<double> x0, const LbfgsOptions& options,
                           const LbfgsProjection* projection = nullptr);

}  // namespace odeco
