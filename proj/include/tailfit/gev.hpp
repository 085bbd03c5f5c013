#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace tailfit {

// Location, scale and shape of a generalized extreme value distribution.
// Units of location and scale are seconds throughout the toolkit.
struct GevParams {
  double location = 0.0;
  double scale = 1.0;
  double shape = 0.0;

  friend bool operator==(const GevParams&, const GevParams&) = default;
};

// |shape| below this routes every evaluation to the Gumbel formulas.
inline constexpr double kGumbelShapeThreshold = 1e-8;

// Throws ParameterError unless scale > 0 and all fields are finite.
void validate(const GevParams& params);

bool is_gumbel(const GevParams& params) noexcept;

// Closed support interval; infinite ends are +-infinity.
struct Support {
  double lower;
  double upper;
};

Support gev_support(const GevParams& params);

// Distribution function F(x) = exp(-(1 + xi z)^(-1/xi)), z = (x - mu)/sigma,
// with the Gumbel limit exp(-exp(-z)) at xi = 0.
double gev_cdf(double x, const GevParams& params);

// Density, the exact derivative of gev_cdf. Zero outside the support.
double gev_pdf(double x, const GevParams& params);

// Natural log of gev_pdf; -infinity outside the support.
double gev_log_pdf(double x, const GevParams& params);

// Inverse of gev_cdf. Throws DomainError unless 0 < p < 1.
double gev_quantile(double p, const GevParams& params);

// n draws by inverse transform. The generator is std::mt19937_64 seeded with
// `seed`; each draw consumes one 64-bit output mapped by open_unit().
std::vector<double> gev_sample(const GevParams& params, std::size_t n,
                               std::uint64_t seed);

}  // namespace tailfit
