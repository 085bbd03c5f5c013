#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tailfit::cli {

inline constexpr const char* kVersion = "0.1.0";

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,          // bad flags or parameter values
  kInputError = 3,     // unreadable or malformed input, sample below the floor
  kNotConverged = 4,   // fit did not converge, or baseline fit unconverged
  kFlagged = 5,        // detect: at least one observation flagged
  kRuntimeError = 6,   // probe or output I/O failure
};

struct FitCommand {
  std::string input;
  std::filesystem::path out = ".";
  std::optional<std::string> phase;
  bool skip_bad_rows = false;
  std::size_t bins = 20;
  double level = 0.95;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0;
  bool svg = false;
  std::size_t min_sample = 30;
  std::optional<double> fix_shape;
};

struct SimulateCommand {
  std::size_t nodes = 16;
  double kt = 1.0;
  std::size_t runs = 400;
  std::string dist = "exp:1";
  std::uint64_t seed = 0;
  double meta_overhead = 0.0;
  std::filesystem::path out = ".";
};

struct DiagnoseCommand {
  std::string input;
  std::string fit;
  std::filesystem::path out = ".";
  std::optional<std::string> phase;
  bool skip_bad_rows = false;
  std::size_t bins = 20;
  double level = 0.95;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0;
  bool svg = false;
};

struct DetectCommand {
  std::string input;
  std::string baseline;
  double threshold = 0.001;
  std::optional<std::string> phase;
  bool skip_bad_rows = false;
  std::filesystem::path out = ".";
};

struct ProbeCommand {
  std::vector<std::string> targets;
  std::uint64_t total_bytes = 512ULL * 1024 * 1024;
  std::uint64_t stripe_bytes = 1024ULL * 1024;
  std::size_t runs = 400;
  std::string sync = "sync";
  std::uint64_t seed = 0;
  bool no_warmup = false;
  std::filesystem::path out = ".";
};

// Output files, relative to the --out directory.
inline constexpr const char* kSimulatedFile = "simulated.csv";
inline constexpr const char* kFitSummaryFile = "fit.txt";
inline constexpr const char* kDiagnosticsSummaryFile = "diagnostics.txt";
inline constexpr const char* kSvgFile = "panels.svg";
inline constexpr const char* kDetectFile = "detect.csv";
inline constexpr const char* kProbeFile = "probe.csv";
inline constexpr const char* kManifestFile = "manifest.txt";

// Each returns an ExitCode; messages go to `log`.
int cmd_fit(const FitCommand& cmd, std::ostream& log);
int cmd_simulate(const SimulateCommand& cmd, std::ostream& log);
int cmd_diagnose(const DiagnoseCommand& cmd, std::ostream& log);
int cmd_detect(const DetectCommand& cmd, std::ostream& log);
int cmd_probe(const ProbeCommand& cmd, std::ostream& log);

// Full command line, args[0] being the first argument after the program
// name. Writes a manifest.txt next to every output so `tailfit replay
// DIR/manifest.txt` reproduces the run.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tailfit::cli
