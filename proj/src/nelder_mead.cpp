#include "tailfit/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tailfit/errors.hpp"

namespace tailfit {

namespace {

struct Simplex {
  std::vector<std::vector<double>> points;
  std::vector<double> values;
};

Simplex make_simplex(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> start, std::span<const double> steps) {
  const std::size_t dim = start.size();
  Simplex s;
  s.points.assign(dim + 1, std::vector<double>(start.begin(), start.end()));
  for (std::size_t i = 0; i < dim; ++i) {
    s.points[i + 1][i] += steps[i];
  }
  s.values.reserve(dim + 1);
  for (const auto& p : s.points) {
    s.values.push_back(objective(p));
  }
  return s;
}

// Runs one simplex to convergence or until `budget` iterations are spent.
// Returns the iterations used.
int run_simplex(const std::function<double(std::span<const double>)>& objective,
                Simplex& s, double tolerance, int budget, bool& converged) {
  const std::size_t dim = s.points.size() - 1;
  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), reflected(dim), trial(dim);

  auto along = [&](double coeff, const std::vector<double>& from,
                   std::vector<double>& out) {
    for (std::size_t j = 0; j < dim; ++j) {
      out[j] = centroid[j] + coeff * (from[j] - centroid[j]);
    }
  };

  converged = false;
  int it = 0;
  for (; it < budget; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return s.values[a] < s.values[b];
    });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[dim - 1];
    if (s.values[worst] - s.values[best] <= tolerance) {
      converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto& p = s.points[order[k]];
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += p[j];
    }
    for (double& c : centroid) c /= static_cast<double>(dim);

    along(-1.0, s.points[worst], reflected);
    const double f_reflected = objective(reflected);

    if (f_reflected < s.values[best]) {
      along(-2.0, s.points[worst], trial);
      const double f_expanded = objective(trial);
      if (f_expanded < f_reflected) {
        s.points[worst] = trial;
        s.values[worst] = f_expanded;
      } else {
        s.points[worst] = reflected;
        s.values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < s.values[second_worst]) {
      s.points[worst] = reflected;
      s.values[worst] = f_reflected;
      continue;
    }

    // Outside contraction when the reflection beat the worst point,
    // inside contraction otherwise.
    const bool outside = f_reflected < s.values[worst];
    along(outside ? -0.5 : 0.5, s.points[worst], trial);
    const double f_contracted = objective(trial);
    if (f_contracted < (outside ? f_reflected : s.values[worst])) {
      s.points[worst] = trial;
      s.values[worst] = f_contracted;
      continue;
    }

    const auto& anchor = s.points[best];
    for (std::size_t k = 1; k <= dim; ++k) {
      auto& p = s.points[order[k]];
      for (std::size_t j = 0; j < dim; ++j) {
        p[j] = anchor[j] + 0.5 * (p[j] - anchor[j]);
      }
      s.values[order[k]] = objective(p);
    }
  }
  return it;
}

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> start, std::span<const double> steps,
    const NelderMeadOptions& options) {
  if (start.empty() || steps.size() != start.size()) {
    throw ParameterError("nelder_mead: start and steps must be non-empty and equal length");
  }
  if (options.max_iterations < 1) {
    throw ParameterError("nelder_mead: max_iterations must be >= 1");
  }

  NelderMeadResult result;
  Simplex s = make_simplex(objective, start, steps);
  double previous_best = std::numeric_limits<double>::infinity();
  int remaining = options.max_iterations;

  for (int round = 0; round <= options.max_restarts && remaining > 0; ++round) {
    bool converged = false;
    const int used = run_simplex(objective, s, options.tolerance, remaining, converged);
    remaining -= used;
    result.iterations += used;

    const auto best = static_cast<std::size_t>(
        std::min_element(s.values.begin(), s.values.end()) - s.values.begin());
    result.x = s.points[best];
    result.value = s.values[best];
    result.converged = converged;
    if (!converged) break;
    if (previous_best - result.value <= options.tolerance) break;
    previous_best = result.value;

    // Restart with the original edge lengths around the best vertex; a
    // collapsed simplex can stall away from the minimum.
    s = make_simplex(objective, result.x, steps);
  }
  return result;
}

}  // namespace tailfit
