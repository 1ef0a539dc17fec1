#pragma once

#include <functional>
#include <vector>

namespace epp {

// Value-and-gradient callback: returns f(x) and fills grad (same length as x).
using ObjectiveFn =
    std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

struct OptimResult {
  std::vector<double> x;        // best iterate seen
  double f = 0.0;               // objective at x
  double grad_inf_norm = 0.0;   // at the final iterate
  int iterations = 0;
  bool converged = false;       // gradient tolerance reached
};

// Dense BFGS with Armijo backtracking. Deterministic: no randomness, fixed
// initial inverse Hessian (identity), fixed line-search schedule. Tracks and
// returns the best iterate, so a non-converged run is still usable.
OptimResult minimize_bfgs(const ObjectiveFn& objective, std::vector<double> x0,
                          int max_iter = 10000, double grad_tol = 1e-6);

}  // namespace epp
