#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tailfit {

struct ObservationSet;

// One CSV row: `run,duration_s[,phase]`.
struct LogRow {
  std::uint64_t run = 0;
  double duration_s = 0.0;
  std::string phase;

  friend bool operator==(const LogRow&, const LogRow&) = default;
};

struct LatencyLog {
  std::vector<LogRow> rows;
  bool has_phase = false;
  std::string source_path;
  // Last-modification time of the source file, ISO 8601 UTC; empty for streams.
  std::string source_time;
  // Rows dropped under skip_bad_rows, as "line N: reason".
  std::vector<std::string> skipped;
};

struct ParseOptions {
  bool skip_bad_rows = false;
};

// Parses a latency log. Throws FormatError (with the 1-based line number) on a
// missing header or, unless skip_bad_rows, the first malformed row. Durations
// must be finite and >= 0; run indices unique per phase label.
LatencyLog parse_log(const std::string& path, const ParseOptions& options = {});
LatencyLog parse_log(std::istream& in, const ParseOptions& options = {});

// Durations in file order, restricted to `phase` when given.
std::vector<double> durations(const LatencyLog& log,
                              const std::optional<std::string>& phase = std::nullopt);

// Phase labels in order of first appearance.
std::vector<std::string> phases(const LatencyLog& log);

void write_log(std::ostream& out, const LatencyLog& log);
void write_log(const std::string& path, const LatencyLog& log);

LatencyLog to_log(const ObservationSet& observations);

// Service times from a CSV with header `duration_s` or `run,duration_s[,phase]`.
std::vector<double> read_durations(const std::string& path);

// Shortest decimal text that parses back to exactly `v`.
std::string format_real(double v);

}  // namespace tailfit
