#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tailfit {

struct NelderMeadOptions {
  // Stop when max(f) - min(f) over the simplex is at most this.
  double tolerance = 1e-10;
  int max_iterations = 5000;
  // Fresh simplexes built around the best point after each convergence.
  int max_restarts = 3;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free simplex minimization (reflection 1, expansion 2,
// contraction 0.5, shrink 0.5). `steps` gives the initial edge length along
// each coordinate. The objective must return finite values; map
// infeasible points to a large penalty.
NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> start, std::span<const double> steps,
    const NelderMeadOptions& options = {});

}  // namespace tailfit
