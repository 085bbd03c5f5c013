#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailfit/gev.hpp"

namespace tailfit {

// Observed durations in seconds.
struct Sample {
  std::vector<double> values;
  std::string label;
};

inline constexpr std::size_t kDefaultMinSampleSize = 30;

struct FitOptions {
  // Nelder-Mead stops when the NLL spread across the simplex falls below this.
  double tolerance = 1e-10;
  int max_iterations = 5000;
  std::size_t min_sample_size = kDefaultMinSampleSize;
  // Upper bound on the Newton decrement g' H^-1 g at the returned optimum.
  double gradient_tolerance = 1e-8;
  // When set, fit the two-parameter model with the shape held at this value.
  std::optional<double> fixed_shape;
};

enum class Parameter { location = 0, scale = 1, shape = 2 };

using Matrix3 = std::array<std::array<double, 3>, 3>;

struct FitResult {
  GevParams params;
  // Standard errors of (location, scale, shape). NaN when unavailable.
  std::array<double, 3> std_error{};
  Matrix3 covariance{};
  bool std_error_available = false;
  double nll = 0.0;
  std::size_t n = 0;
  bool converged = false;
  int iterations = 0;
  // Newton decrement when the Hessian is positive definite, Euclidean norm of
  // the gradient otherwise.
  double gradient_norm = 0.0;
  bool shape_fixed = false;
  std::string message;
};

struct Interval {
  double low;
  double high;
};

// -sum log f(x_i). +infinity when any observation lies outside the support.
// Throws DomainError on an empty sample.
double negative_log_likelihood(std::span<const double> values,
                               const GevParams& params);

// Moment-based start: scale = sqrt(6 var)/pi, location = mean - 0.5772157 scale,
// shape = 0.1. Throws DegenerateSampleError for zero variance.
GevParams initial_params(std::span<const double> values);

// Maximum-likelihood fit. Nelder-Mead on (location, log scale, shape) from
// initial_params, polished with Newton steps on a central-difference Hessian;
// covariance is the inverse of that Hessian at the optimum.
FitResult fit_mle(std::span<const double> values, const FitOptions& options = {});

// Wald interval estimate +- z((1+level)/2) * stderr.
// Throws UnavailableError when the fit has no standard errors.
Interval confidence_interval(const FitResult& fit, Parameter which, double level);

// Standard normal quantile.
double normal_quantile(double p);

// Central-difference Hessian step for a parameter value.
inline double hessian_step(double value) {
  const double rel = 1e-4 * (value < 0 ? -value : value);
  return rel > 1e-5 ? rel : 1e-5;
}

double parameter_value(const GevParams& params, Parameter which);

}  // namespace tailfit
