#include "tailfit/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tailfit/errors.hpp"
#include "tailfit/ingest.hpp"

namespace tailfit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool finite(double v) { return std::isfinite(v); }

// Box-Muller, cosine branch only so each call consumes exactly two draws.
double standard_normal(SplitMix64& rng) {
  const double u1 = open_unit(rng());
  const double u2 = open_unit(rng());
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> parse_numbers(const std::string& text, const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const char* first = item.data();
    const char* last = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw ParameterError("bad number '" + item + "' in distribution '" + spec + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& latency_model_kinds() {
  static const std::vector<std::string> kinds{
      "exp:RATE", "lognormal:LOGMEAN,LOGSD", "normal:MEAN,SD", "uniform:A,B",
      "pareto:SCALE,TAIL_INDEX", "empirical:PATH"};
  return kinds;
}

void validate(const LatencyModel& model) {
  std::visit(
      overloaded{
          [](const Exponential& m) {
            if (!finite(m.rate) || m.rate <= 0.0)
              throw ParameterError("exponential rate must be finite and > 0");
          },
          [](const LogNormal& m) {
            if (!finite(m.log_mean) || !finite(m.log_sd) || m.log_sd <= 0.0)
              throw ParameterError("lognormal needs finite log-mean and log-sd > 0");
          },
          [](const TruncatedNormal& m) {
            if (!finite(m.mean) || !finite(m.sd) || m.sd <= 0.0)
              throw ParameterError("normal needs finite mean and sd > 0");
            // Below this the zero-truncation rejection loop stops being practical.
            if (m.mean < -6.0 * m.sd)
              throw ParameterError("normal mean is too far below zero for truncation at 0");
          },
          [](const Uniform& m) {
            if (!finite(m.a) || !finite(m.b) || !(m.a < m.b))
              throw ParameterError("uniform needs finite a < b");
            if (m.a < 0.0) throw ParameterError("uniform service times must be >= 0");
          },
          [](const Pareto& m) {
            if (!finite(m.scale) || !finite(m.tail_index) || m.scale <= 0.0 ||
                m.tail_index <= 0.0)
              throw ParameterError("pareto needs scale > 0 and tail index > 0");
          },
          [](const Empirical& m) {
            if (m.atoms.empty()) throw ParameterError("empirical sample is empty");
            for (double a : m.atoms) {
              if (!finite(a) || a < 0.0)
                throw ParameterError("empirical service times must be finite and >= 0");
            }
          },
      },
      model);
}

double lower_bound(const LatencyModel& model) {
  return std::visit(
      overloaded{
          [](const Exponential&) { return 0.0; },
          [](const LogNormal&) { return 0.0; },
          [](const TruncatedNormal&) { return 0.0; },
          [](const Uniform& m) { return m.a; },
          [](const Pareto& m) { return m.scale; },
          [](const Empirical& m) { return *std::min_element(m.atoms.begin(), m.atoms.end()); },
      },
      model);
}

LatencyModel parse_latency_model(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ParameterError("distribution '" + text + "' must look like kind:params");
  }
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);

  LatencyModel model;
  if (kind == "empirical") {
    model = Empirical{read_durations(rest)};
  } else {
    const auto p = parse_numbers(rest, text);
    auto need = [&](std::size_t count) {
      if (p.size() != count) {
        throw ParameterError("distribution '" + kind + "' takes " +
                             std::to_string(count) + " parameter(s)");
      }
    };
    if (kind == "exp" || kind == "exponential") {
      need(1);
      model = Exponential{p[0]};
    } else if (kind == "lognormal") {
      need(2);
      model = LogNormal{p[0], p[1]};
    } else if (kind == "normal") {
      need(2);
      model = TruncatedNormal{p[0], p[1]};
    } else if (kind == "uniform") {
      need(2);
      model = Uniform{p[0], p[1]};
    } else if (kind == "pareto") {
      need(2);
      model = Pareto{p[0], p[1]};
    } else {
      std::string list;
      for (const auto& k : latency_model_kinds()) list += " " + k;
      throw ParameterError("unknown distribution kind '" + kind + "'; supported:" + list);
    }
  }
  validate(model);
  return model;
}

std::string describe(const LatencyModel& model) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const Exponential& m) { os << "exp:" << m.rate; },
                 [&](const LogNormal& m) { os << "lognormal:" << m.log_mean << ',' << m.log_sd; },
                 [&](const TruncatedNormal& m) { os << "normal:" << m.mean << ',' << m.sd; },
                 [&](const Uniform& m) { os << "uniform:" << m.a << ',' << m.b; },
                 [&](const Pareto& m) { os << "pareto:" << m.scale << ',' << m.tail_index; },
                 [&](const Empirical& m) { os << "empirical[" << m.atoms.size() << " atoms]"; },
             },
             model);
  return os.str();
}

double sample_node(const LatencyModel& model, SplitMix64& rng) {
  return std::visit(
      overloaded{
          [&](const Exponential& m) { return -std::log(open_unit(rng())) / m.rate; },
          [&](const LogNormal& m) {
            return std::exp(m.log_mean + m.log_sd * standard_normal(rng));
          },
          [&](const TruncatedNormal& m) {
            for (;;) {
              const double v = m.mean + m.sd * standard_normal(rng);
              if (v >= 0.0) return v;
            }
          },
          [&](const Uniform& m) { return m.a + (m.b - m.a) * open_unit(rng()); },
          [&](const Pareto& m) {
            return m.scale * std::pow(open_unit(rng()), -1.0 / m.tail_index);
          },
          [&](const Empirical& m) {
            const auto n = static_cast<double>(m.atoms.size());
            auto idx = static_cast<std::size_t>(open_unit(rng()) * n);
            return m.atoms[std::min(idx, m.atoms.size() - 1)];
          },
      },
      model);
}

void validate(const SimConfig& config) {
  if (config.nodes < 1) throw ParameterError("node count must be >= 1");
  if (config.runs < 1) throw ParameterError("run count must be >= 1");
  if (!std::isfinite(config.congestion) || config.congestion < 1.0) {
    throw ParameterError("congestion factor k_t must be finite and >= 1");
  }
  if (!std::isfinite(config.meta_overhead) || config.meta_overhead < 0.0) {
    throw ParameterError("meta overhead must be finite and >= 0");
  }
  validate(config.model);
}

namespace {

double node_maximum(const SimConfig& config, std::uint64_t run) {
  double worst = 0.0;
  for (std::size_t node = 0; node < config.nodes; ++node) {
    SplitMix64 rng(derive_seed(config.seed, run, node));
    const double s = sample_node(config.model, rng);
    worst = node == 0 ? s : std::max(worst, s);
  }
  return worst;
}

}  // namespace

double simulate_write(const SimConfig& config, std::uint64_t run) {
  validate(config);
  return config.congestion * node_maximum(config, run) + config.meta_overhead;
}

ObservationSet simulate_campaign(const SimConfig& config) {
  validate(config);
  ObservationSet out;
  out.config = config;
  out.durations.reserve(config.runs);
  if (config.keep_node_maxima) out.node_maxima.reserve(config.runs);
  for (std::size_t run = 0; run < config.runs; ++run) {
    const double worst = node_maximum(config, run);
    out.durations.push_back(config.congestion * worst + config.meta_overhead);
    if (config.keep_node_maxima) out.node_maxima.push_back(worst);
  }
  return out;
}

}  // namespace tailfit
