#include "tailfit/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "tailfit/errors.hpp"
#include "tailfit/rng.hpp"

namespace tailfit {

namespace {

void require_converged(const FitResult& fit) {
  if (!fit.converged) {
    throw NotConvergedError("diagnostics need a converged fit (" + fit.message + ")");
  }
}

std::vector<double> sorted_copy(std::span<const double> values) {
  if (values.empty()) throw DomainError("diagnostics need a non-empty sample");
  std::vector<double> out(values.begin(), values.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Linear interpolation between order statistics (R type 7) of a sorted range.
double interpolated_quantile(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<ProbabilityPoint> probability_plot(std::span<const double> values,
                                               const FitResult& fit) {
  require_converged(fit);
  const auto x = sorted_copy(values);
  const double denom = static_cast<double>(x.size()) + 1.0;
  std::vector<ProbabilityPoint> out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.push_back({static_cast<double>(i + 1) / denom, gev_cdf(x[i], fit.params)});
  }
  return out;
}

QuantilePlot quantile_plot(std::span<const double> values, const FitResult& fit,
                           const QuantilePlotOptions& options) {
  require_converged(fit);
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw DomainError("band level must lie in (0, 1)");
  }
  if (options.bootstrap < 100) {
    throw DomainError("quantile bands need at least 100 bootstrap replicates");
  }
  const auto x = sorted_copy(values);
  const std::size_t n = x.size();
  const double denom = static_cast<double>(n) + 1.0;

  QuantilePlot plot;
  plot.level = options.level;
  plot.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    plot.points.push_back(
        {gev_quantile(static_cast<double>(i + 1) / denom, fit.params), x[i]});
  }

  // by_rank[i * B + r] is the i-th order statistic of replicate r.
  const std::size_t reps = options.bootstrap;
  std::vector<double> by_rank(n * reps);
  for (std::size_t r = 0; r < reps; ++r) {
    auto replicate = gev_sample(fit.params, n, derive_seed(options.seed, r));
    std::sort(replicate.begin(), replicate.end());
    for (std::size_t i = 0; i < n; ++i) by_rank[i * reps + r] = replicate[i];
  }

  const double p_low = 0.5 * (1.0 - options.level);
  const double p_high = 0.5 * (1.0 + options.level);
  plot.band.reserve(n);
  plot.outlier.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> column(by_rank.data() + i * reps, reps);
    std::sort(column.begin(), column.end());
    const Band b{interpolated_quantile(column, p_low), interpolated_quantile(column, p_high)};
    plot.band.push_back(b);
    plot.outlier.push_back(x[i] < b.low || x[i] > b.high);
  }
  return plot;
}

HistogramDensity histogram_density(std::span<const double> values,
                                   const GevParams& params, std::size_t bins) {
  validate(params);
  if (values.empty()) throw DomainError("histogram needs a non-empty sample");
  if (bins == 0) throw DomainError("histogram needs at least one bin");
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *min_it;
  const double hi = *max_it;
  if (!(hi > lo)) {
    throw DegenerateSampleError("all observations are equal; histogram range is empty");
  }

  HistogramDensity out;
  const double width = (hi - lo) / static_cast<double>(bins);
  out.bins.reserve(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double left = lo + width * static_cast<double>(b);
    const double right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
    out.bins.push_back({left, right, 0});
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    b = std::min(b, bins - 1);
    // Edges are recomputed from lo + k*width, so settle rounding at boundaries.
    while (b > 0 && v < out.bins[b].low) --b;
    while (b + 1 < bins && v >= out.bins[b + 1].low) ++b;
    ++out.bins[b].count;
  }

  const Support support = gev_support(params);
  double x_lo = std::min(lo, params.location - 4.0 * params.scale);
  double x_hi = std::max(hi, params.location + 4.0 * params.scale);
  x_lo = std::max(x_lo, support.lower);
  x_hi = std::min(x_hi, support.upper);
  out.curve.reserve(kDensityCurvePoints);
  for (std::size_t k = 0; k < kDensityCurvePoints; ++k) {
    const double x = x_lo + (x_hi - x_lo) * static_cast<double>(k) /
                                static_cast<double>(kDensityCurvePoints - 1);
    out.curve.push_back({x, gev_pdf(x, params)});
  }
  return out;
}

double ks_statistic(std::span<const double> values, const GevParams& params) {
  const auto x = sorted_copy(values);
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = gev_cdf(x[i], params);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return std::clamp(d, 0.0, 1.0);
}

DiagnosticsReport diagnose(std::span<const double> values, const FitResult& fit,
                           const QuantilePlotOptions& qq_options, std::size_t bins) {
  DiagnosticsReport report;
  report.pp = probability_plot(values, fit);
  report.qq = quantile_plot(values, fit, qq_options);
  report.histogram = histogram_density(values, fit.params, bins);
  report.ks = ks_statistic(values, fit.params);
  return report;
}

}  // namespace tailfit
