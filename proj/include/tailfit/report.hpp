#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "tailfit/diagnostics.hpp"
#include "tailfit/fitting.hpp"

namespace tailfit {

// Panel CSVs. Column headers:
//   pp.csv         rank,empirical,model
//   qq.csv         rank,model_q,observed,band_lo,band_hi,outlier
//   histogram.csv  bin_lo,bin_hi,count
//   density.csv    x,density
void write_pp_csv(std::ostream& out, const std::vector<ProbabilityPoint>& pp);
void write_qq_csv(std::ostream& out, const QuantilePlot& qq);
void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins);
void write_density_csv(std::ostream& out, const std::vector<DensityPoint>& curve);

// Writes the four panel CSVs into `dir`.
void write_panels(const std::filesystem::path& dir, const DiagnosticsReport& report);

struct SummaryExtras {
  std::string label;
  double ci_level = 0.95;
  std::optional<double> ks;
  std::optional<std::size_t> outliers;
};

// Flat key=value summary of a fit: parameters, standard errors, covariance,
// NLL, the Wald interval of the shape and, when given, the KS statistic.
void write_fit_summary(std::ostream& out, const FitResult& fit, const SummaryExtras& extras);

// Reads back the fields of a fit summary that define the FitResult.
// Throws FormatError on missing or malformed keys.
FitResult read_fit_summary(const std::filesystem::path& path);
FitResult read_fit_summary(std::istream& in);

// Self-contained three-panel SVG: probability plot, quantile plot with band
// and outliers in red, histogram with the fitted density.
std::string render_svg(const DiagnosticsReport& report, const GevParams& params);

}  // namespace tailfit
