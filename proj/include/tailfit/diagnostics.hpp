#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tailfit/fitting.hpp"
#include "tailfit/gev.hpp"

namespace tailfit {

struct ProbabilityPoint {
  double empirical;  // plotting position i/(n+1)
  double model;      // F(x_(i))
};

struct QuantilePoint {
  double model;     // F^-1(i/(n+1))
  double observed;  // x_(i)
};

struct Band {
  double low;
  double high;
};

struct QuantilePlot {
  std::vector<QuantilePoint> points;
  std::vector<Band> band;
  std::vector<bool> outlier;  // per rank: observed outside band
  double level = 0.95;
};

struct HistogramBin {
  double low;
  double high;
  std::size_t count;
};

struct DensityPoint {
  double x;
  double density;
};

struct HistogramDensity {
  std::vector<HistogramBin> bins;
  std::vector<DensityPoint> curve;
};

struct QuantilePlotOptions {
  double level = 0.95;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultBins = 20;
inline constexpr std::size_t kDensityCurvePoints = 200;

// Sorted observations paired as (i/(n+1), F(x_(i))).
// Throws NotConvergedError for an unconverged fit.
std::vector<ProbabilityPoint> probability_plot(std::span<const double> values,
                                               const FitResult& fit);

// Quantile plot with pointwise parametric-bootstrap bands: replicate r is
// gev_sample(fit.params, n, derive_seed(seed, r)), sorted; the band at rank i
// spans the (1-level)/2 and (1+level)/2 quantiles (linear interpolation) of
// the replicates' i-th order statistics.
QuantilePlot quantile_plot(std::span<const double> values, const FitResult& fit,
                           const QuantilePlotOptions& options = {});

// Equal-width bins over [min, max], last bin right-closed, and the fitted
// density on kDensityCurvePoints evenly spaced points covering the data and
// location +- 4 scale, clipped to the support.
HistogramDensity histogram_density(std::span<const double> values,
                                   const GevParams& params,
                                   std::size_t bins = kDefaultBins);

// One-sample Kolmogorov-Smirnov distance to gev_cdf.
double ks_statistic(std::span<const double> values, const GevParams& params);

struct DiagnosticsReport {
  std::vector<ProbabilityPoint> pp;
  QuantilePlot qq;
  HistogramDensity histogram;
  double ks = 0.0;
};

DiagnosticsReport diagnose(std::span<const double> values, const FitResult& fit,
                           const QuantilePlotOptions& qq_options = {},
                           std::size_t bins = kDefaultBins);

}  // namespace tailfit
