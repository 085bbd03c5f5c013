#include "tailfit/gev.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "tailfit/errors.hpp"
#include "tailfit/rng.hpp"

namespace tailfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_number(double x, const char* what) {
  if (std::isnan(x)) {
    throw DomainError(std::string(what) + " is NaN");
  }
}

}  // namespace

void validate(const GevParams& params) {
  if (!std::isfinite(params.location) || !std::isfinite(params.scale) ||
      !std::isfinite(params.shape)) {
    throw ParameterError("GEV parameters must be finite");
  }
  if (!(params.scale > 0.0)) {
    throw ParameterError("GEV scale must be positive, got " +
                         std::to_string(params.scale));
  }
}

bool is_gumbel(const GevParams& params) noexcept {
  return std::abs(params.shape) < kGumbelShapeThreshold;
}

Support gev_support(const GevParams& params) {
  validate(params);
  if (is_gumbel(params)) {
    return {-kInf, kInf};
  }
  const double endpoint = params.location - params.scale / params.shape;
  if (params.shape > 0.0) {
    return {endpoint, kInf};
  }
  return {-kInf, endpoint};
}

double gev_cdf(double x, const GevParams& params) {
  validate(params);
  require_number(x, "x");
  const double z = (x - params.location) / params.scale;
  if (is_gumbel(params)) {
    return std::exp(-std::exp(-z));
  }
  const double xi = params.shape;
  if (1.0 + xi * z <= 0.0) {
    return xi > 0.0 ? 0.0 : 1.0;
  }
  const double t = std::exp(-std::log1p(xi * z) / xi);
  return std::exp(-t);
}

double gev_log_pdf(double x, const GevParams& params) {
  validate(params);
  require_number(x, "x");
  const double log_scale = std::log(params.scale);
  const double z = (x - params.location) / params.scale;
  if (is_gumbel(params)) {
    if (z == -kInf || z == kInf) {
      return -kInf;
    }
    return -log_scale - z - std::exp(-z);
  }
  const double xi = params.shape;
  const double s = 1.0 + xi * z;
  if (s < 0.0) {
    return -kInf;
  }
  if (s == 0.0) {
    // Limit at the finite endpoint: -(1 + 1/xi) log s with s -> 0+.
    if (xi > -1.0) {
      return -kInf;
    }
    return xi == -1.0 ? -log_scale : kInf;
  }
  if (!std::isfinite(s)) {
    return -kInf;
  }
  const double log_s = std::log1p(xi * z);
  const double t = std::exp(-log_s / xi);
  return -log_scale - (1.0 + 1.0 / xi) * log_s - t;
}

double gev_pdf(double x, const GevParams& params) {
  return std::exp(gev_log_pdf(x, params));
}

double gev_quantile(double p, const GevParams& params) {
  validate(params);
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("quantile probability must lie in (0, 1), got " +
                      std::to_string(p));
  }
  const double log_y = std::log(-std::log(p));
  if (is_gumbel(params)) {
    return params.location - params.scale * log_y;
  }
  const double xi = params.shape;
  return params.location + params.scale * std::expm1(-xi * log_y) / xi;
}

std::vector<double> gev_sample(const GevParams& params, std::size_t n,
                               std::uint64_t seed) {
  validate(params);
  if (n == 0) {
    throw DomainError("gev_sample needs n >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(gev_quantile(open_unit(rng()), params));
  }
  return out;
}

}  // namespace tailfit
