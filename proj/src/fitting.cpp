#include "tailfit/fitting.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "tailfit/errors.hpp"
#include "tailfit/nelder_mead.hpp"

namespace tailfit {

namespace {

constexpr double kPenalty = 1e300;
constexpr double kEulerGamma = 0.5772157;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// NLL that stays finite for the optimizer and the difference stencils.
double penalized_nll(std::span<const double> values, const GevParams& p) {
  if (!std::isfinite(p.location) || !std::isfinite(p.shape) ||
      !std::isfinite(p.scale) || !(p.scale > 0.0)) {
    return kPenalty;
  }
  const double nll = negative_log_likelihood(values, p);
  return std::isfinite(nll) ? nll : kPenalty;
}

// Free parameters are (location, scale[, shape]) in natural units.
class Objective {
 public:
  Objective(std::span<const double> values, std::optional<double> fixed_shape)
      : values_(values), fixed_shape_(fixed_shape) {}

  [[nodiscard]] int dim() const { return fixed_shape_ ? 2 : 3; }

  [[nodiscard]] GevParams params(const Eigen::VectorXd& theta) const {
    return {theta[0], theta[1], fixed_shape_ ? *fixed_shape_ : theta[2]};
  }

  [[nodiscard]] Eigen::VectorXd theta(const GevParams& p) const {
    Eigen::VectorXd t(dim());
    t[0] = p.location;
    t[1] = p.scale;
    if (!fixed_shape_) t[2] = p.shape;
    return t;
  }

  double operator()(const Eigen::VectorXd& theta) const {
    return penalized_nll(values_, params(theta));
  }

  // Central differences. When a stencil point leaves the support (an
  // optimum close to a finite endpoint), the steps are halved until the
  // whole stencil stays inside.
  void derivatives(const Eigen::VectorXd& theta, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess, bool& feasible) const {
    for (int halvings = 0; halvings <= 40; ++halvings) {
      stencil(theta, std::ldexp(1.0, -halvings), grad, hess, feasible);
      if (feasible) return;
    }
  }

 private:
  void stencil(const Eigen::VectorXd& theta, double shrink, Eigen::VectorXd& grad,
               Eigen::MatrixXd& hess, bool& feasible) const {
    const int k = dim();
    grad.resize(k);
    hess.resize(k, k);
    feasible = true;
    const double f0 = (*this)(theta);
    Eigen::VectorXd h(k);
    for (int i = 0; i < k; ++i) h[i] = shrink * hessian_step(theta[i]);

    auto eval = [&](const Eigen::VectorXd& t) {
      const double v = (*this)(t);
      if (v >= kPenalty) feasible = false;
      return v;
    };

    // Gradient steps follow the scale parameter so that location and scale
    // are differenced on the data's own scale, not their magnitude.
    for (int i = 0; i < k; ++i) {
      const double hg = shrink * (i < 2 ? 1e-5 * theta[1] : 1e-5);
      Eigen::VectorXd up = theta, down = theta;
      up[i] += hg;
      down[i] -= hg;
      grad[i] = (eval(up) - eval(down)) / (2.0 * hg);
    }
    for (int i = 0; i < k; ++i) {
      Eigen::VectorXd up = theta, down = theta;
      up[i] += h[i];
      down[i] -= h[i];
      hess(i, i) = (eval(up) - 2.0 * f0 + eval(down)) / (h[i] * h[i]);
    }
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        Eigen::VectorXd pp = theta, pm = theta, mp = theta, mm = theta;
        pp[i] += h[i]; pp[j] += h[j];
        pm[i] += h[i]; pm[j] -= h[j];
        mp[i] -= h[i]; mp[j] += h[j];
        mm[i] -= h[i]; mm[j] -= h[j];
        const double v = (eval(pp) - eval(pm) - eval(mp) + eval(mm)) / (4.0 * h[i] * h[j]);
        hess(i, j) = v;
        hess(j, i) = v;
      }
    }
  }

  std::span<const double> values_;
  std::optional<double> fixed_shape_;
};

void check_values(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw DomainError("sample contains a non-finite value");
    }
  }
}

}  // namespace

double parameter_value(const GevParams& params, Parameter which) {
  switch (which) {
    case Parameter::location: return params.location;
    case Parameter::scale: return params.scale;
    case Parameter::shape: return params.shape;
  }
  return kNaN;
}

double negative_log_likelihood(std::span<const double> values,
                               const GevParams& params) {
  if (values.empty()) {
    throw DomainError("negative_log_likelihood needs a non-empty sample");
  }
  validate(params);
  double sum = 0.0;
  for (double x : values) {
    const double lp = gev_log_pdf(x, params);
    if (lp == -std::numeric_limits<double>::infinity()) {
      return std::numeric_limits<double>::infinity();
    }
    sum -= lp;
  }
  return sum;
}

GevParams initial_params(std::span<const double> values) {
  if (values.size() < 2) {
    throw DegenerateSampleError("initial_params needs at least two observations");
  }
  check_values(values);
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double variance = ss / (n - 1.0);
  if (!(variance > 0.0)) {
    throw DegenerateSampleError("sample has zero variance");
  }
  const double scale = std::sqrt(6.0 * variance) / std::numbers::pi;
  return {mean - kEulerGamma * scale, scale, 0.1};
}

FitResult fit_mle(std::span<const double> values, const FitOptions& options) {
  if (values.size() < options.min_sample_size) {
    throw DomainError("sample has " + std::to_string(values.size()) +
                      " observations; fitting requires at least " +
                      std::to_string(options.min_sample_size));
  }
  check_values(values);

  const Objective objective(values, options.fixed_shape);
  GevParams start = initial_params(values);
  if (options.fixed_shape) start.shape = *options.fixed_shape;
  // Widening the scale moves the finite endpoint away from the data.
  for (int i = 0; i < 64 && penalized_nll(values, start) >= kPenalty; ++i) {
    start.scale *= 2.0;
  }

  // The simplex works on (location, log scale[, shape]).
  const int k = objective.dim();
  std::vector<double> x0{start.location, std::log(start.scale)};
  std::vector<double> steps{0.25 * start.scale, 0.25};
  if (k == 3) {
    x0.push_back(start.shape);
    steps.push_back(0.1);
  }
  auto simplex_objective = [&](std::span<const double> x) {
    Eigen::VectorXd theta(k);
    theta[0] = x[0];
    theta[1] = std::exp(x[1]);
    if (k == 3) theta[2] = x[2];
    return objective(theta);
  };
  NelderMeadOptions nm_options;
  nm_options.tolerance = options.tolerance;
  nm_options.max_iterations = options.max_iterations;
  const NelderMeadResult nm = nelder_mead(simplex_objective, x0, steps, nm_options);

  Eigen::VectorXd theta(k);
  theta[0] = nm.x[0];
  theta[1] = std::exp(nm.x[1]);
  if (k == 3) theta[2] = nm.x[2];
  double f = objective(theta);

  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  bool feasible = true;
  for (int iter = 0; iter < 50; ++iter) {
    objective.derivatives(theta, grad, hess, feasible);
    if (!feasible) break;
    const Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success) break;
    const Eigen::VectorXd step = llt.solve(grad);
    if (!(grad.dot(step) > 1e-24)) break;
    bool accepted = false;
    for (double t = 1.0; t > 1e-6; t *= 0.5) {
      const Eigen::VectorXd candidate = theta - t * step;
      const double fc = objective(candidate);
      if (fc <= f) {
        accepted = fc < f || t == 1.0;
        theta = candidate;
        f = fc;
        break;
      }
    }
    if (!accepted) break;
  }

  FitResult result;
  result.params = objective.params(theta);
  result.nll = f;
  result.n = values.size();
  result.iterations = nm.iterations;
  result.shape_fixed = options.fixed_shape.has_value();
  for (auto& row : result.covariance) row.fill(kNaN);
  result.std_error.fill(kNaN);

  objective.derivatives(theta, grad, hess, feasible);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
  const bool positive_definite = feasible && hess.allFinite() &&
                                 eig.info() == Eigen::Success &&
                                 eig.eigenvalues().minCoeff() > 0.0;
  if (positive_definite) {
    const Eigen::MatrixXd cov = hess.inverse();
    result.gradient_norm = grad.dot(cov * grad);
    for (auto& row : result.covariance) row.fill(0.0);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        result.covariance[i][j] = 0.5 * (cov(i, j) + cov(j, i));
      }
    }
    for (int i = 0; i < 3; ++i) {
      result.std_error[i] = std::sqrt(result.covariance[i][i]);
    }
    result.std_error_available = true;
  } else {
    result.gradient_norm = grad.allFinite() ? grad.norm() : kNaN;
  }

  const double grad_limit = positive_definite
                                ? options.gradient_tolerance
                                : options.gradient_tolerance * static_cast<double>(values.size());
  const bool gradient_ok = result.gradient_norm <= grad_limit;
  const bool finite_optimum = f < kPenalty;
  result.converged = nm.converged && gradient_ok && finite_optimum && feasible;
  if (!finite_optimum) {
    result.message = "no parameter values with finite likelihood were found";
  } else if (!feasible) {
    result.message = "optimum lies on the support boundary of the data";
  } else if (!nm.converged) {
    result.message = "simplex did not converge within " +
                     std::to_string(options.max_iterations) + " iterations";
  } else if (!gradient_ok) {
    result.message = "gradient above tolerance at optimum";
  } else if (!positive_definite) {
    result.message = "Hessian not positive definite; standard errors unavailable";
  } else {
    result.message = "converged";
  }
  return result;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal quantile needs p in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

Interval confidence_interval(const FitResult& fit, Parameter which, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("confidence level must lie in (0, 1)");
  }
  if (!fit.std_error_available) {
    throw UnavailableError("standard errors unavailable for this fit");
  }
  const double estimate = parameter_value(fit.params, which);
  const double se = fit.std_error[static_cast<int>(which)];
  const double half = normal_quantile(0.5 + 0.5 * level) * se;
  return {estimate - half, estimate + half};
}

}  // namespace tailfit
