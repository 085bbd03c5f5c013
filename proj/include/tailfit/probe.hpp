#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tailfit/ingest.hpp"

namespace tailfit {

enum class SyncMode {
  // fdatasync after every stripe-sized chunk.
  synchronous_flush,
  // Page-cache writes, no flush. Fast, but not a faithful synchronous write.
  best_effort,
};

inline constexpr std::uint64_t kMiB = 1024ULL * 1024ULL;

struct ProbeConfig {
  // Directories standing in for storage nodes; one writer each.
  std::vector<std::filesystem::path> targets;
  std::uint64_t total_bytes = 512 * kMiB;
  std::uint64_t stripe_bytes = kMiB;
  std::size_t runs = 400;
  SyncMode sync = SyncMode::synchronous_flush;
  std::uint64_t seed = 0;
  // One discarded run before the campaign.
  bool warmup = true;
  // Leave the last run's files in place instead of removing them.
  bool keep_files = false;
};

struct ProbeRecord {
  std::size_t run = 0;
  double meta_open_s = 0.0;
  double data_write_s = 0.0;
  double meta_close_s = 0.0;
  // Per target, seconds from timer start until its writer finished.
  std::vector<double> target_completion_s;
};

// Monotonic time in seconds. Called concurrently by writer threads.
using ProbeClock = std::function<double()>;

double steady_seconds();

// Throws ParameterError on an invalid configuration.
void validate(const ProbeConfig& config);

std::filesystem::path probe_file(const ProbeConfig& config, std::size_t target);

// Bytes written to `target` in every stripe, deterministic in the seed.
std::vector<unsigned char> probe_payload(std::uint64_t seed, std::size_t target,
                                         std::size_t size);

// Times `runs` one-to-many writes. Per run: open every target file (meta
// open), start the timer, release all writers through a start latch, stop the
// timer once the last writer signals completion (data write), then close
// (meta close). Throws ProbeError for unwritable targets or insufficient free
// space; a failed run removes its files before throwing.
std::vector<ProbeRecord> run_probe(const ProbeConfig& config,
                                   const ProbeClock& clock = steady_seconds);

// Long-form log: phases meta_open, data_write, meta_close and target_K.
LatencyLog to_log(std::span<const ProbeRecord> records);

}  // namespace tailfit
