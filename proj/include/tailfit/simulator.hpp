#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tailfit/rng.hpp"

namespace tailfit {

// Per-node service-time distributions p(s). Parameters are in seconds where
// dimensional.
struct Exponential {
  double rate = 1.0;
};
struct LogNormal {
  double log_mean = 0.0;
  double log_sd = 1.0;
};
// Normal truncated at zero by rejection; p(s) is therefore not exactly normal.
struct TruncatedNormal {
  double mean = 1.0;
  double sd = 1.0;
};
struct Uniform {
  double a = 0.0;
  double b = 1.0;
};
struct Pareto {
  double scale = 1.0;
  double tail_index = 1.0;
};
// Resampling with replacement from observed service times.
struct Empirical {
  std::vector<double> atoms;
};

using LatencyModel =
    std::variant<Exponential, LogNormal, TruncatedNormal, Uniform, Pareto, Empirical>;

// Throws ParameterError on invalid parameters.
void validate(const LatencyModel& model);

// Greatest lower bound of the model's support.
double lower_bound(const LatencyModel& model);

// Parses "kind:p1[,p2]", e.g. "exp:1", "lognormal:0,0.5", "normal:1,0.2",
// "uniform:0,1", "pareto:1,2". "empirical:PATH" reads a CSV of service times
// (header `duration_s` or `run,duration_s`).
LatencyModel parse_latency_model(const std::string& text);

std::string describe(const LatencyModel& model);

// Supported kind names, for usage messages.
const std::vector<std::string>& latency_model_kinds();

// One independent draw from p(s).
double sample_node(const LatencyModel& model, SplitMix64& rng);

struct SimConfig {
  std::size_t nodes = 16;
  double congestion = 1.0;  // k_t
  std::size_t runs = 400;
  std::uint64_t seed = 0;
  LatencyModel model = Exponential{1.0};
  // Fixed seconds added outside the max, for serialized metadata phases.
  double meta_overhead = 0.0;
  bool keep_node_maxima = false;
};

// Throws ParameterError unless nodes >= 1, runs >= 1, k_t >= 1, overhead >= 0
// and the model is valid.
void validate(const SimConfig& config);

struct ObservationSet {
  std::vector<double> durations;
  SimConfig config;
  // max_j S_j per run before scaling, when keep_node_maxima is set.
  std::vector<double> node_maxima;
};

// k_t * max of `nodes` draws + meta_overhead, node j drawing from the
// substream derive_seed(config.seed, run, j).
double simulate_write(const SimConfig& config, std::uint64_t run);

ObservationSet simulate_campaign(const SimConfig& config);

}  // namespace tailfit
