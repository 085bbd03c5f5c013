#include "tailfit/probe.hpp"

#include <fcntl.h>
#include <sys/statvfs.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <latch>
#include <map>
#include <optional>
#include <thread>

#include "tailfit/errors.hpp"
#include "tailfit/rng.hpp"

namespace tailfit {

namespace {

std::string errno_text(int err) { return std::strerror(err); }

class TargetFiles {
 public:
  explicit TargetFiles(const ProbeConfig& config) : config_(config) {}
  TargetFiles(const TargetFiles&) = delete;
  TargetFiles& operator=(const TargetFiles&) = delete;
  ~TargetFiles() {
    if (!committed_) abandon();
  }

  void open_all() {
    fds_.reserve(config_.targets.size());
    for (std::size_t t = 0; t < config_.targets.size(); ++t) {
      const auto path = probe_file(config_, t);
      const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
      if (fd < 0) {
        const int err = errno;
        abandon();
        throw ProbeError("cannot open target " + path.string() + ": " + errno_text(err));
      }
      fds_.push_back(fd);
    }
  }

  [[nodiscard]] int fd(std::size_t t) const { return fds_[t]; }

  // Returns the first close error, if any.
  std::optional<std::string> close_all() {
    std::optional<std::string> error;
    for (std::size_t t = 0; t < fds_.size(); ++t) {
      if (::close(fds_[t]) != 0 && !error) {
        error = "close of " + probe_file(config_, t).string() + " failed: " + errno_text(errno);
      }
    }
    fds_.clear();
    committed_ = !error;
    return error;
  }

  // Closes whatever is open and removes every probe file.
  void abandon() {
    for (int fd : fds_) ::close(fd);
    fds_.clear();
    remove_files();
  }

  void remove_files() {
    for (std::size_t t = 0; t < config_.targets.size(); ++t) {
      std::error_code ec;
      std::filesystem::remove(probe_file(config_, t), ec);
    }
  }

 private:
  const ProbeConfig& config_;
  std::vector<int> fds_;
  bool committed_ = false;
};

// Writes `share` bytes in stripe-sized chunks; returns an error message or
// nothing.
std::optional<std::string> write_share(int fd, std::span<const unsigned char> stripe,
                                       std::uint64_t share, SyncMode sync) {
  std::uint64_t offset = 0;
  while (offset < share) {
    const std::size_t chunk =
        static_cast<std::size_t>(std::min<std::uint64_t>(stripe.size(), share - offset));
    std::size_t done = 0;
    while (done < chunk) {
      const ssize_t n = ::pwrite(fd, stripe.data() + done, chunk - done,
                                 static_cast<off_t>(offset + done));
      if (n < 0) {
        if (errno == EINTR) continue;
        return "write failed: " + errno_text(errno);
      }
      if (n == 0) return std::string("write made no progress");
      done += static_cast<std::size_t>(n);
    }
    if (sync == SyncMode::synchronous_flush && ::fdatasync(fd) != 0) {
      return "fdatasync failed: " + errno_text(errno);
    }
    offset += chunk;
  }
  return std::nullopt;
}

void check_free_space(const ProbeConfig& config) {
  const std::uint64_t share = config.total_bytes / config.targets.size();
  // Targets sharing a filesystem draw on the same free space.
  std::map<unsigned long, std::pair<std::uint64_t, std::uint64_t>> need_by_fs;
  for (const auto& target : config.targets) {
    struct statvfs st {};
    if (::statvfs(target.c_str(), &st) != 0) {
      throw ProbeError("cannot stat target " + target.string() + ": " + errno_text(errno));
    }
    auto& entry = need_by_fs[st.f_fsid];
    entry.first += share;
    entry.second = static_cast<std::uint64_t>(st.f_bavail) * st.f_frsize;
  }
  for (const auto& [fsid, entry] : need_by_fs) {
    if (entry.first > entry.second) {
      throw ProbeError("insufficient free space: need " + std::to_string(entry.first) +
                       " bytes, " + std::to_string(entry.second) + " available");
    }
  }
}

ProbeRecord timed_run(const ProbeConfig& config, const ProbeClock& clock,
                      const std::vector<std::vector<unsigned char>>& payloads,
                      std::size_t run) {
  const std::size_t targets = config.targets.size();
  const std::uint64_t share = config.total_bytes / targets;

  ProbeRecord record;
  record.run = run;
  record.target_completion_s.assign(targets, 0.0);

  TargetFiles files(config);
  const double open_start = clock();
  files.open_all();
  record.meta_open_s = clock() - open_start;

  std::vector<std::optional<std::string>> errors(targets);
  std::latch start(1);
  std::latch done(static_cast<std::ptrdiff_t>(targets));
  double timer_start = 0.0;
  {
    std::vector<std::jthread> writers;
    writers.reserve(targets);
    for (std::size_t t = 0; t < targets; ++t) {
      writers.emplace_back([&, t] {
        start.wait();
        errors[t] = write_share(files.fd(t), payloads[t], share, config.sync);
        record.target_completion_s[t] = clock() - timer_start;
        done.count_down();
      });
    }
    timer_start = clock();
    start.count_down();
    done.wait();
    record.data_write_s = clock() - timer_start;
  }

  for (std::size_t t = 0; t < targets; ++t) {
    if (errors[t]) {
      throw ProbeError("target " + config.targets[t].string() + ": " + *errors[t]);
    }
  }

  const double close_start = clock();
  const auto close_error = files.close_all();
  record.meta_close_s = clock() - close_start;
  if (close_error) {
    files.abandon();
    throw ProbeError(*close_error);
  }
  return record;
}

}  // namespace

double steady_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void validate(const ProbeConfig& config) {
  if (config.targets.empty()) throw ParameterError("probe needs at least one target");
  if (config.runs < 1) throw ParameterError("probe needs runs >= 1");
  if (config.total_bytes == 0 || config.stripe_bytes == 0) {
    throw ParameterError("probe sizes must be positive");
  }
  if (config.total_bytes % config.targets.size() != 0) {
    throw ParameterError("total bytes must divide evenly across targets");
  }
  if (config.stripe_bytes > config.total_bytes / config.targets.size()) {
    throw ParameterError("stripe size exceeds the per-target share");
  }
}

std::filesystem::path probe_file(const ProbeConfig& config, std::size_t target) {
  return config.targets.at(target) / ("tailfit_probe_" + std::to_string(target) + ".dat");
}

std::vector<unsigned char> probe_payload(std::uint64_t seed, std::size_t target,
                                         std::size_t size) {
  std::vector<unsigned char> out(size);
  SplitMix64 rng(derive_seed(seed, target));
  for (std::size_t i = 0; i < size; i += 8) {
    std::uint64_t word = rng();
    for (std::size_t b = 0; b < 8 && i + b < size; ++b) {
      out[i + b] = static_cast<unsigned char>(word & 0xFF);
      word >>= 8;
    }
  }
  return out;
}

std::vector<ProbeRecord> run_probe(const ProbeConfig& config, const ProbeClock& clock) {
  validate(config);
  for (const auto& target : config.targets) {
    std::error_code ec;
    if (!std::filesystem::is_directory(target, ec)) {
      throw ProbeError("target " + target.string() + " is not a directory");
    }
  }
  check_free_space(config);

  std::vector<std::vector<unsigned char>> payloads;
  payloads.reserve(config.targets.size());
  for (std::size_t t = 0; t < config.targets.size(); ++t) {
    payloads.push_back(probe_payload(config.seed, t, config.stripe_bytes));
  }

  if (config.warmup) timed_run(config, clock, payloads, 0);

  std::vector<ProbeRecord> records;
  records.reserve(config.runs);
  for (std::size_t run = 0; run < config.runs; ++run) {
    records.push_back(timed_run(config, clock, payloads, run));
  }
  if (!config.keep_files) TargetFiles(config).remove_files();
  return records;
}

LatencyLog to_log(std::span<const ProbeRecord> records) {
  LatencyLog log;
  log.has_phase = true;
  for (const auto& r : records) {
    log.rows.push_back({r.run, r.meta_open_s, "meta_open"});
    log.rows.push_back({r.run, r.data_write_s, "data_write"});
    log.rows.push_back({r.run, r.meta_close_s, "meta_close"});
    for (std::size_t t = 0; t < r.target_completion_s.size(); ++t) {
      log.rows.push_back({r.run, r.target_completion_s[t], "target_" + std::to_string(t)});
    }
  }
  return log;
}

}  // namespace tailfit
