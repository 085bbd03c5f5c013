#include "tailfit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "tailfit/errors.hpp"
#include "tailfit/ingest.hpp"

namespace tailfit {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

const char* kParamNames[3] = {"location", "scale", "shape"};

}  // namespace

void write_pp_csv(std::ostream& out, const std::vector<ProbabilityPoint>& pp) {
  out << "rank,empirical,model\n";
  for (std::size_t i = 0; i < pp.size(); ++i) {
    out << i + 1 << ',' << format_real(pp[i].empirical) << ',' << format_real(pp[i].model)
        << '\n';
  }
}

void write_qq_csv(std::ostream& out, const QuantilePlot& qq) {
  out << "rank,model_q,observed,band_lo,band_hi,outlier\n";
  for (std::size_t i = 0; i < qq.points.size(); ++i) {
    out << i + 1 << ',' << format_real(qq.points[i].model) << ','
        << format_real(qq.points[i].observed) << ',' << format_real(qq.band[i].low) << ','
        << format_real(qq.band[i].high) << ',' << (qq.outlier[i] ? 1 : 0) << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins) {
  out << "bin_lo,bin_hi,count\n";
  for (const auto& b : bins) {
    out << format_real(b.low) << ',' << format_real(b.high) << ',' << b.count << '\n';
  }
}

void write_density_csv(std::ostream& out, const std::vector<DensityPoint>& curve) {
  out << "x,density\n";
  for (const auto& p : curve) {
    out << format_real(p.x) << ',' << format_real(p.density) << '\n';
  }
}

void write_panels(const std::filesystem::path& dir, const DiagnosticsReport& report) {
  auto pp = open_out(dir / "pp.csv");
  write_pp_csv(pp, report.pp);
  auto qq = open_out(dir / "qq.csv");
  write_qq_csv(qq, report.qq);
  auto hist = open_out(dir / "histogram.csv");
  write_histogram_csv(hist, report.histogram.bins);
  auto dens = open_out(dir / "density.csv");
  write_density_csv(dens, report.histogram.curve);
}

void write_fit_summary(std::ostream& out, const FitResult& fit, const SummaryExtras& extras) {
  out << "# tailfit GEV fit summary (seconds)\n";
  if (!extras.label.empty()) out << "label=" << extras.label << '\n';
  out << "n=" << fit.n << '\n';
  out << "converged=" << (fit.converged ? "true" : "false") << '\n';
  out << "message=" << fit.message << '\n';
  out << "iterations=" << fit.iterations << '\n';
  out << "gradient_norm=" << format_real(fit.gradient_norm) << '\n';
  out << "shape_fixed=" << (fit.shape_fixed ? "true" : "false") << '\n';
  out << "location=" << format_real(fit.params.location) << '\n';
  out << "scale=" << format_real(fit.params.scale) << '\n';
  out << "shape=" << format_real(fit.params.shape) << '\n';
  out << "stderr_available=" << (fit.std_error_available ? "true" : "false") << '\n';
  if (fit.std_error_available) {
    for (int i = 0; i < 3; ++i) {
      out << "se_" << kParamNames[i] << '=' << format_real(fit.std_error[i]) << '\n';
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        out << "cov_" << i << j << '=' << format_real(fit.covariance[i][j]) << '\n';
      }
    }
    const Interval ci = confidence_interval(fit, Parameter::shape, extras.ci_level);
    out << "shape_ci_level=" << format_real(extras.ci_level) << '\n';
    out << "shape_ci_low=" << format_real(ci.low) << '\n';
    out << "shape_ci_high=" << format_real(ci.high) << '\n';
  }
  out << "nll=" << format_real(fit.nll) << '\n';
  if (extras.ks) out << "ks_statistic=" << format_real(*extras.ks) << '\n';
  if (extras.outliers) out << "outliers=" << *extras.outliers << '\n';
}

FitResult read_fit_summary(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("expected key=value", line_no);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }

  auto text = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("fit summary is missing '" + key + "'");
    return it->second;
  };
  auto real = [&](const std::string& key) {
    const std::string& s = text(key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw FormatError("fit summary value for '" + key + "' is not numeric");
    }
    return v;
  };
  auto flag = [&](const std::string& key) {
    const std::string& s = text(key);
    if (s != "true" && s != "false") {
      throw FormatError("fit summary value for '" + key + "' must be true or false");
    }
    return s == "true";
  };

  FitResult fit;
  fit.params = {real("location"), real("scale"), real("shape")};
  try {
    validate(fit.params);
  } catch (const ParameterError& e) {
    throw FormatError(std::string("fit summary parameters invalid: ") + e.what());
  }
  fit.n = static_cast<std::size_t>(real("n"));
  fit.converged = flag("converged");
  fit.nll = real("nll");
  fit.message = kv.count("message") ? kv["message"] : std::string();
  fit.shape_fixed = kv.count("shape_fixed") ? flag("shape_fixed") : false;
  fit.std_error_available = flag("stderr_available");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  fit.std_error.fill(nan);
  for (auto& row : fit.covariance) row.fill(nan);
  if (fit.std_error_available) {
    for (int i = 0; i < 3; ++i) {
      fit.std_error[i] = real(std::string("se_") + kParamNames[i]);
      for (int j = 0; j < 3; ++j) {
        fit.covariance[i][j] = real("cov_" + std::to_string(i) + std::to_string(j));
      }
    }
  }
  return fit;
}

FitResult read_fit_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open fit summary '" + path.string() + "'");
  return read_fit_summary(in);
}

namespace {

struct Frame {
  double left, top, width, height;
  double x_min, x_max, y_min, y_max;

  [[nodiscard]] double px(double x) const {
    return left + (x - x_min) / (x_max - x_min) * width;
  }
  [[nodiscard]] double py(double y) const {
    return top + height - (y - y_min) / (y_max - y_min) * height;
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

std::string label_num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

void axes(std::ostringstream& svg, const Frame& f, const std::string& title,
          const std::string& x_label, const std::string& y_label) {
  svg << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\""
      << num(f.width) << "\" height=\"" << num(f.height)
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  svg << "<text x=\"" << num(f.left + f.width / 2) << "\" y=\"" << num(f.top - 8)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
  svg << "<text x=\"" << num(f.left + f.width / 2) << "\" y=\"" << num(f.top + f.height + 32)
      << "\" text-anchor=\"middle\" font-size=\"11\">" << x_label << "</text>\n";
  svg << "<text x=\"" << num(f.left - 44) << "\" y=\"" << num(f.top + f.height / 2)
      << "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 "
      << num(f.left - 44) << ' ' << num(f.top + f.height / 2) << ")\">" << y_label
      << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double x = f.x_min + (f.x_max - f.x_min) * k / 4.0;
    const double y = f.y_min + (f.y_max - f.y_min) * k / 4.0;
    svg << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(f.top + f.height + 14)
        << "\" text-anchor=\"middle\" font-size=\"9\">" << label_num(x) << "</text>\n";
    svg << "<text x=\"" << num(f.left - 4) << "\" y=\"" << num(f.py(y) + 3)
        << "\" text-anchor=\"end\" font-size=\"9\">" << label_num(y) << "</text>\n";
  }
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const Frame& f,
                     const std::string& style) {
  std::ostringstream os;
  os << "<polyline fill=\"none\" " << style << " points=\"";
  for (const auto& [x, y] : pts) os << num(f.px(x)) << ',' << num(f.py(y)) << ' ';
  os << "\"/>\n";
  return os.str();
}

}  // namespace

std::string render_svg(const DiagnosticsReport& report, const GevParams& params) {
  constexpr double kWidth = 520, kPanel = 240, kGap = 80, kLeft = 70;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << num(3 * (kPanel + kGap) + 20) << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Probability plot.
  {
    const Frame f{kLeft, 40, kWidth - kLeft - 30, kPanel, 0, 1, 0, 1};
    axes(svg, f, "Probability plot", "empirical", "model");
    svg << polyline({{0, 0}, {1, 1}}, f, "stroke=\"#999\"");
    for (const auto& p : report.pp) {
      svg << "<circle cx=\"" << num(f.px(p.empirical)) << "\" cy=\"" << num(f.py(p.model))
          << "\" r=\"1.8\" fill=\"black\"/>\n";
    }
  }

  // Quantile plot.
  {
    const auto& qq = report.qq;
    double lo = qq.points.front().model, hi = qq.points.back().model;
    for (std::size_t i = 0; i < qq.points.size(); ++i) {
      lo = std::min({lo, qq.points[i].observed, qq.band[i].low});
      hi = std::max({hi, qq.points[i].observed, qq.band[i].high});
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const Frame f{kLeft, 40 + kPanel + kGap, kWidth - kLeft - 30, kPanel, lo, hi, lo, hi};
    axes(svg, f, "Quantile plot", "model", "observed");
    svg << polyline({{lo, lo}, {hi, hi}}, f, "stroke=\"#999\"");
    std::vector<std::pair<double, double>> band_lo, band_hi;
    for (std::size_t i = 0; i < qq.points.size(); ++i) {
      band_lo.emplace_back(qq.points[i].model, qq.band[i].low);
      band_hi.emplace_back(qq.points[i].model, qq.band[i].high);
    }
    svg << polyline(band_lo, f, "stroke=\"blue\"");
    svg << polyline(band_hi, f, "stroke=\"blue\"");
    for (std::size_t i = 0; i < qq.points.size(); ++i) {
      svg << "<circle cx=\"" << num(f.px(qq.points[i].model)) << "\" cy=\""
          << num(f.py(qq.points[i].observed)) << "\" r=\"1.8\" fill=\""
          << (qq.outlier[i] ? "red" : "black") << "\"/>\n";
    }
  }

  // Histogram with density.
  {
    const auto& bins = report.histogram.bins;
    const auto& curve = report.histogram.curve;
    std::size_t total = 0;
    for (const auto& b : bins) total += b.count;
    double y_max = 0.0;
    std::vector<double> heights;
    for (const auto& b : bins) {
      const double h = static_cast<double>(b.count) / (static_cast<double>(total) * (b.high - b.low));
      heights.push_back(h);
      y_max = std::max(y_max, h);
    }
    for (const auto& p : curve) {
      if (std::isfinite(p.density)) y_max = std::max(y_max, p.density);
    }
    if (!(y_max > 0.0)) y_max = 1.0;
    const double x_min = std::min(bins.front().low, curve.front().x);
    const double x_max = std::max(bins.back().high, curve.back().x);
    const Frame f{kLeft, 40 + 2 * (kPanel + kGap), kWidth - kLeft - 30, kPanel,
                  x_min, x_max, 0, y_max * 1.05};
    axes(svg, f, "Histogram and fitted density", "duration (s)", "density (1/s)");
    for (std::size_t b = 0; b < bins.size(); ++b) {
      svg << "<rect x=\"" << num(f.px(bins[b].low)) << "\" y=\"" << num(f.py(heights[b]))
          << "\" width=\"" << num(f.px(bins[b].high) - f.px(bins[b].low)) << "\" height=\""
          << num(f.py(0) - f.py(heights[b])) << "\" fill=\"#ccc\" stroke=\"#666\"/>\n";
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : curve) {
      if (std::isfinite(p.density)) pts.emplace_back(p.x, p.density);
    }
    svg << polyline(pts, f, "stroke=\"black\" stroke-width=\"1.5\"");
    svg << "<text x=\"" << num(f.left + f.width - 4) << "\" y=\"" << num(f.top + 14)
        << "\" text-anchor=\"end\" font-size=\"10\">mu=" << label_num(params.location)
        << " sigma=" << label_num(params.scale) << " xi=" << label_num(params.shape)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace tailfit
