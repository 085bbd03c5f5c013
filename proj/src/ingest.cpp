#include "tailfit/ingest.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tailfit/errors.hpp"
#include "tailfit/simulator.hpp"

namespace tailfit {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, out);
  return ec == std::errc() && ptr == last && !text.empty();
}

std::string file_time(const std::string& path) {
  std::error_code ec;
  const auto t = std::filesystem::last_write_time(path, ec);
  if (ec) return {};
  const auto sys = std::chrono::file_clock::to_sys(t);
  const std::time_t tt = std::chrono::system_clock::to_time_t(sys);
  std::array<char, 32> buf{};
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

}  // namespace

LatencyLog parse_log(std::istream& in, const ParseOptions& options) {
  LatencyLog log;
  std::string line;
  std::size_t line_no = 0;

  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    const std::string header = trim(line);
    if (header.empty()) continue;
    const auto cols = split(header);
    if (cols.size() == 2 && cols[0] == "run" && cols[1] == "duration_s") {
      log.has_phase = false;
    } else if (cols.size() == 3 && cols[0] == "run" && cols[1] == "duration_s" &&
               cols[2] == "phase") {
      log.has_phase = true;
    } else {
      throw FormatError("missing header; expected 'run,duration_s[,phase]'", line_no);
    }
    have_header = true;
  }
  if (!have_header) {
    throw FormatError("missing header; expected 'run,duration_s[,phase]'", line_no + 1);
  }

  std::map<std::string, std::set<std::uint64_t>> seen;
  const std::size_t width = log.has_phase ? 3 : 2;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;

    std::string problem;
    LogRow row;
    const auto cols = split(text);
    if (cols.size() != width) {
      problem = "expected " + std::to_string(width) + " fields, got " +
                std::to_string(cols.size());
    } else if (!parse_number(cols[0], row.run)) {
      problem = "run index '" + cols[0] + "' is not a non-negative integer";
    } else if (!parse_number(cols[1], row.duration_s)) {
      problem = "duration '" + cols[1] + "' is not numeric";
    } else if (!std::isfinite(row.duration_s) || row.duration_s < 0.0) {
      problem = "duration '" + cols[1] + "' must be finite and >= 0";
    } else {
      if (log.has_phase) row.phase = cols[2];
      if (!seen[row.phase].insert(row.run).second) {
        problem = "duplicate run index " + cols[0] +
                  (row.phase.empty() ? std::string() : " for phase '" + row.phase + "'");
      }
    }

    if (!problem.empty()) {
      if (!options.skip_bad_rows) throw FormatError(problem, line_no);
      log.skipped.push_back("line " + std::to_string(line_no) + ": " + problem);
      continue;
    }
    log.rows.push_back(std::move(row));
  }
  return log;
}

LatencyLog parse_log(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  LatencyLog log = parse_log(in, options);
  log.source_path = path;
  log.source_time = file_time(path);
  return log;
}

std::vector<double> durations(const LatencyLog& log,
                              const std::optional<std::string>& phase) {
  std::vector<double> out;
  out.reserve(log.rows.size());
  for (const auto& row : log.rows) {
    if (!phase || row.phase == *phase) out.push_back(row.duration_s);
  }
  return out;
}

std::vector<std::string> phases(const LatencyLog& log) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& row : log.rows) {
    if (seen.insert(row.phase).second) out.push_back(row.phase);
  }
  return out;
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void write_log(std::ostream& out, const LatencyLog& log) {
  out << (log.has_phase ? "run,duration_s,phase\n" : "run,duration_s\n");
  for (const auto& row : log.rows) {
    out << row.run << ',' << format_real(row.duration_s);
    if (log.has_phase) out << ',' << row.phase;
    out << '\n';
  }
}

void write_log(const std::string& path, const LatencyLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_log(out, log);
  if (!out) throw Error("write to '" + path + "' failed");
}

LatencyLog to_log(const ObservationSet& observations) {
  LatencyLog log;
  log.rows.reserve(observations.durations.size());
  for (std::size_t i = 0; i < observations.durations.size(); ++i) {
    log.rows.push_back({i, observations.durations[i], {}});
  }
  return log;
}

std::vector<double> read_durations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::string first;
  std::size_t line_no = 0;
  while (std::getline(in, first)) {
    ++line_no;
    if (!trim(first).empty()) break;
  }
  if (trim(first) != "duration_s") {
    return durations(parse_log(path));
  }
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    double v = 0.0;
    if (!parse_number(text, v) || !std::isfinite(v) || v < 0.0) {
      throw FormatError("duration '" + text + "' must be a finite number >= 0", line_no);
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace tailfit
