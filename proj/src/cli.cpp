#include "tailfit/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "tailfit/diagnostics.hpp"
#include "tailfit/errors.hpp"
#include "tailfit/fitting.hpp"
#include "tailfit/ingest.hpp"
#include "tailfit/probe.hpp"
#include "tailfit/report.hpp"
#include "tailfit/simulator.hpp"

namespace tailfit::cli {

namespace fs = std::filesystem;

namespace {

std::vector<double> load_durations(const std::string& input,
                                   const std::optional<std::string>& phase,
                                   bool skip_bad_rows, std::ostream& log) {
  ParseOptions options;
  options.skip_bad_rows = skip_bad_rows;
  const LatencyLog parsed = parse_log(input, options);
  for (const auto& s : parsed.skipped) log << "skipped " << s << '\n';

  std::optional<std::string> selected = phase;
  if (!selected && parsed.has_phase) {
    const auto labels = phases(parsed);
    if (std::find(labels.begin(), labels.end(), "data_write") != labels.end()) {
      selected = "data_write";
    } else if (labels.size() == 1) {
      selected = labels.front();
    } else {
      throw FormatError("log has several phases; choose one with --phase");
    }
  }
  auto values = durations(parsed, selected);
  if (values.empty()) {
    throw FormatError("no durations in '" + input + "'" +
                      (selected ? " for phase '" + *selected + "'" : std::string()));
  }
  return values;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw Error("cannot create output directory '" + dir.string() + "'");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

// Maps toolkit exceptions onto exit codes.
template <class Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const FormatError& e) {
    log << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const DegenerateSampleError& e) {
    log << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    log << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const ParameterError& e) {
    log << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NotConvergedError& e) {
    log << "not converged: " << e.what() << '\n';
    return kNotConverged;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

void print_fit(std::ostream& log, const FitResult& fit) {
  log << "n=" << fit.n << " converged=" << (fit.converged ? "yes" : "no") << " ("
      << fit.message << ")\n";
  log << "location=" << format_real(fit.params.location)
      << " scale=" << format_real(fit.params.scale)
      << " shape=" << format_real(fit.params.shape) << '\n';
  if (fit.std_error_available) {
    log << "stderr location=" << format_real(fit.std_error[0])
        << " scale=" << format_real(fit.std_error[1])
        << " shape=" << format_real(fit.std_error[2]) << '\n';
  }
}

std::size_t count_outliers(const QuantilePlot& qq) {
  return static_cast<std::size_t>(std::count(qq.outlier.begin(), qq.outlier.end(), true));
}

void emit_diagnostics(const fs::path& out, const DiagnosticsReport& report,
                      const GevParams& params, bool svg) {
  write_panels(out, report);
  if (svg) write_text(out / kSvgFile, render_svg(report, params));
}

}  // namespace

int cmd_fit(const FitCommand& cmd, std::ostream& log) {
  return guarded(log, [&] {
    const auto values = load_durations(cmd.input, cmd.phase, cmd.skip_bad_rows, log);
    FitOptions options;
    options.min_sample_size = cmd.min_sample;
    options.fixed_shape = cmd.fix_shape;
    if (values.size() < cmd.min_sample) {
      throw DomainError("input has " + std::to_string(values.size()) +
                        " durations; the minimum sample size for fitting is " +
                        std::to_string(cmd.min_sample));
    }
    const FitResult fit = fit_mle(values, options);
    ensure_dir(cmd.out);
    print_fit(log, fit);

    SummaryExtras extras;
    extras.label = cmd.input;
    extras.ci_level = cmd.level;
    if (!fit.converged) {
      auto summary = open_out(cmd.out / kFitSummaryFile);
      write_fit_summary(summary, fit, extras);
      log << "fit did not converge; diagnostics skipped\n";
      return static_cast<int>(kNotConverged);
    }

    QuantilePlotOptions qq;
    qq.level = cmd.level;
    qq.bootstrap = cmd.bootstrap;
    qq.seed = cmd.seed;
    const DiagnosticsReport report = diagnose(values, fit, qq, cmd.bins);
    extras.ks = report.ks;
    extras.outliers = count_outliers(report.qq);
    {
      auto summary = open_out(cmd.out / kFitSummaryFile);
      write_fit_summary(summary, fit, extras);
    }
    emit_diagnostics(cmd.out, report, fit.params, cmd.svg);
    if (fit.std_error_available) {
      const Interval ci = confidence_interval(fit, Parameter::shape, cmd.level);
      log << "shape CI (" << cmd.level << "): [" << format_real(ci.low) << ", "
          << format_real(ci.high) << "]\n";
    }
    log << "KS statistic=" << format_real(report.ks) << " outliers=" << *extras.outliers
        << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_simulate(const SimulateCommand& cmd, std::ostream& log) {
  return guarded(log, [&] {
    SimConfig config;
    config.nodes = cmd.nodes;
    config.congestion = cmd.kt;
    config.runs = cmd.runs;
    config.seed = cmd.seed;
    config.meta_overhead = cmd.meta_overhead;
    config.model = parse_latency_model(cmd.dist);
    const ObservationSet obs = simulate_campaign(config);
    ensure_dir(cmd.out);
    write_log((cmd.out / kSimulatedFile).string(), to_log(obs));
    log << "wrote " << obs.durations.size() << " durations to "
        << (cmd.out / kSimulatedFile).string() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_diagnose(const DiagnoseCommand& cmd, std::ostream& log) {
  return guarded(log, [&] {
    const FitResult fit = read_fit_summary(fs::path(cmd.fit));
    const auto values = load_durations(cmd.input, cmd.phase, cmd.skip_bad_rows, log);
    QuantilePlotOptions qq;
    qq.level = cmd.level;
    qq.bootstrap = cmd.bootstrap;
    qq.seed = cmd.seed;
    const DiagnosticsReport report = diagnose(values, fit, qq, cmd.bins);
    ensure_dir(cmd.out);
    emit_diagnostics(cmd.out, report, fit.params, cmd.svg);
    const std::size_t outliers = count_outliers(report.qq);
    auto summary = open_out(cmd.out / kDiagnosticsSummaryFile);
    summary << "# tailfit diagnostics summary\n"
            << "n=" << values.size() << '\n'
            << "location=" << format_real(fit.params.location) << '\n'
            << "scale=" << format_real(fit.params.scale) << '\n'
            << "shape=" << format_real(fit.params.shape) << '\n'
            << "level=" << format_real(cmd.level) << '\n'
            << "ks_statistic=" << format_real(report.ks) << '\n'
            << "outliers=" << outliers << '\n';
    log << "KS statistic=" << format_real(report.ks) << " outliers=" << outliers << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_detect(const DetectCommand& cmd, std::ostream& log) {
  return guarded(log, [&] {
    if (!(cmd.threshold > 0.0 && cmd.threshold < 1.0)) {
      throw ParameterError("threshold must lie in (0, 1)");
    }
    const FitResult baseline = read_fit_summary(fs::path(cmd.baseline));
    if (!baseline.converged) {
      throw NotConvergedError("baseline fit '" + cmd.baseline + "' did not converge");
    }
    ParseOptions options;
    options.skip_bad_rows = cmd.skip_bad_rows;
    const LatencyLog parsed = parse_log(cmd.input, options);
    for (const auto& s : parsed.skipped) log << "skipped " << s << '\n';

    ensure_dir(cmd.out);
    auto out = open_out(cmd.out / kDetectFile);
    out << "run,duration_s,tail_prob,flagged\n";
    std::size_t scored = 0, flagged = 0;
    for (const auto& row : parsed.rows) {
      if (cmd.phase && row.phase != *cmd.phase) continue;
      const double tail = 1.0 - gev_cdf(row.duration_s, baseline.params);
      const bool flag = tail < cmd.threshold;
      ++scored;
      flagged += flag ? 1 : 0;
      out << row.run << ',' << format_real(row.duration_s) << ',' << format_real(tail) << ','
          << (flag ? 1 : 0) << '\n';
    }
    log << "scored " << scored << " observations, flagged " << flagged
        << " below tail probability " << cmd.threshold << '\n';
    return static_cast<int>(flagged > 0 ? kFlagged : kOk);
  });
}

int cmd_probe(const ProbeCommand& cmd, std::ostream& log) {
  return guarded(log, [&] {
    ProbeConfig config;
    for (const auto& t : cmd.targets) config.targets.emplace_back(t);
    config.total_bytes = cmd.total_bytes;
    config.stripe_bytes = cmd.stripe_bytes;
    config.runs = cmd.runs;
    config.seed = cmd.seed;
    config.warmup = !cmd.no_warmup;
    if (cmd.sync == "sync") {
      config.sync = SyncMode::synchronous_flush;
    } else if (cmd.sync == "best-effort") {
      config.sync = SyncMode::best_effort;
      log << "note: best-effort mode does not flush; timings are not synchronous writes\n";
    } else {
      throw ParameterError("--sync must be 'sync' or 'best-effort'");
    }
    const auto records = run_probe(config);
    ensure_dir(cmd.out);
    write_log((cmd.out / kProbeFile).string(), to_log(records));
    log << "wrote " << records.size() << " probe records to "
        << (cmd.out / kProbeFile).string() << '\n';
    return static_cast<int>(kOk);
  });
}

namespace {

void add_fit_like(CLI::App* sub, std::optional<std::string>& phase, bool& skip,
                  std::size_t& bins, double& level, std::size_t& bootstrap,
                  std::uint64_t& seed, bool& svg) {
  sub->add_option("--phase", phase, "Phase label to analyse (default data_write when present)");
  sub->add_flag("--skip-bad-rows", skip, "Drop malformed rows instead of failing");
  sub->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  sub->add_option("--level", level, "Confidence level for bands and the shape interval")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--bootstrap", bootstrap, "Bootstrap replicates for quantile bands")
      ->check(CLI::Range(std::size_t{100}, std::numeric_limits<std::size_t>::max()));
  sub->add_option("--seed", seed, "Seed for the bootstrap bands");
  sub->add_flag("--svg", svg, "Also render the panels as SVG");
}

// Resolved options of a parsed subcommand as manifest lines.
std::string manifest_text(const CLI::App& sub) {
  std::ostringstream os;
  os << "# tailfit run manifest\n";
  os << "tailfit_version=" << kVersion << '\n';
  os << "subcommand=" << sub.get_name() << '\n';
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (opt->get_type_size() == 0) {
      os << "flag." << name << '=' << (opt->count() > 0 ? "true" : "false") << '\n';
      continue;
    }
    if (opt->count() > 0) {
      for (const auto& v : opt->results()) os << "arg." << name << '=' << v << '\n';
    } else if (!opt->get_default_str().empty()) {
      os << "arg." << name << '=' << opt->get_default_str() << '\n';
    }
  }
  return os.str();
}

std::vector<std::string> replay_args(const std::string& manifest_path,
                                     const std::optional<std::string>& out_override) {
  std::ifstream in(manifest_path);
  if (!in) throw FormatError("cannot open manifest '" + manifest_path + "'");
  std::string line, subcommand;
  std::vector<std::string> args;
  std::size_t line_no = 0;
  bool out_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("expected key=value", line_no);
    const std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "subcommand") {
      subcommand = value;
    } else if (key.rfind("flag.", 0) == 0) {
      if (value == "true") args.push_back("--" + key.substr(5));
    } else if (key.rfind("arg.", 0) == 0) {
      const std::string name = key.substr(4);
      if (name == "out" && out_override) {
        value = *out_override;
        out_seen = true;
      }
      args.push_back("--" + name);
      args.push_back(value);
    }
  }
  if (subcommand.empty() || subcommand == "replay") {
    throw FormatError("manifest '" + manifest_path + "' names no replayable subcommand");
  }
  if (out_override && !out_seen) {
    args.push_back("--out");
    args.push_back(*out_override);
  }
  args.insert(args.begin(), subcommand);
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tailfit: extreme-value analysis of parallel task durations", "tailfit"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  FitCommand fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a GEV to durations and write diagnostics");
  fit_cmd->add_option("--input", fit.input, "Latency log CSV (run,duration_s[,phase])")->required();
  fit_cmd->add_option("--out", fit.out, "Output directory");
  add_fit_like(fit_cmd, fit.phase, fit.skip_bad_rows, fit.bins, fit.level, fit.bootstrap,
               fit.seed, fit.svg);
  fit_cmd->add_option("--min-sample", fit.min_sample, "Minimum sample size for fitting");
  fit_cmd->add_option("--fix-shape", fit.fix_shape, "Hold the shape at this value");

  SimulateCommand sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate k_t * max of per-node service times");
  sim_cmd->add_option("--nodes", sim.nodes, "Storage node count m")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--kt", sim.kt, "Background traffic factor k_t (>= 1)");
  sim_cmd->add_option("--runs", sim.runs, "Observation count")->check(CLI::PositiveNumber);
  std::string kinds;
  for (const auto& k : latency_model_kinds()) kinds += " " + k;
  sim_cmd->add_option("--dist", sim.dist, "Per-node service time distribution:" + kinds);
  sim_cmd->add_option("--seed", sim.seed, "Campaign seed");
  sim_cmd->add_option("--meta-overhead", sim.meta_overhead, "Seconds added outside the max");
  sim_cmd->add_option("--out", sim.out, "Output directory");

  DiagnoseCommand diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Diagnostics of durations against a saved fit");
  diag_cmd->add_option("--input", diag.input, "Latency log CSV")->required();
  diag_cmd->add_option("--fit", diag.fit, "Fit summary written by 'fit'")->required();
  diag_cmd->add_option("--out", diag.out, "Output directory");
  add_fit_like(diag_cmd, diag.phase, diag.skip_bad_rows, diag.bins, diag.level, diag.bootstrap,
               diag.seed, diag.svg);

  DetectCommand det;
  auto* det_cmd = app.add_subcommand("detect", "Flag durations unlikely under a baseline fit");
  det_cmd->add_option("--input", det.input, "Latency log CSV")->required();
  det_cmd->add_option("--baseline", det.baseline, "Fit summary written by 'fit'")->required();
  det_cmd->add_option("--threshold", det.threshold, "Flag when 1 - F(x) is below this");
  det_cmd->add_option("--phase", det.phase, "Only score rows with this phase label");
  det_cmd->add_flag("--skip-bad-rows", det.skip_bad_rows, "Drop malformed rows");
  det_cmd->add_option("--out", det.out, "Output directory");

  ProbeCommand probe;
  auto* probe_cmd = app.add_subcommand("probe", "Time synchronous one-to-many writes");
  probe_cmd->add_option("--target", probe.targets, "Target directory (repeat per node)")
      ->required();
  probe_cmd->add_option("--total-bytes", probe.total_bytes, "Bytes per run across all targets");
  probe_cmd->add_option("--stripe-bytes", probe.stripe_bytes, "Write unit per chunk");
  probe_cmd->add_option("--runs", probe.runs, "Timed runs")->check(CLI::PositiveNumber);
  probe_cmd->add_option("--sync", probe.sync, "sync | best-effort");
  probe_cmd->add_option("--seed", probe.seed, "Payload seed");
  probe_cmd->add_flag("--no-warmup", probe.no_warmup, "Skip the discarded warm-up run");
  probe_cmd->add_option("--out", probe.out, "Output directory");

  std::string manifest;
  std::optional<std::string> replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay_cmd->add_option("manifest", manifest, "manifest.txt from a previous run")->required();
  replay_cmd->add_option("--out", replay_out, "Override the output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << "run with --help for usage\n";
    return kUsage;
  }

  if (replay_cmd->parsed()) {
    std::vector<std::string> replayed;
    const int rc = guarded(err, [&] {
      replayed = replay_args(manifest, replay_out);
      return static_cast<int>(kOk);
    });
    if (rc != kOk) return rc;
    return run(replayed, out, err);
  }

  auto record = [&](const CLI::App* sub, const fs::path& dir) {
    return guarded(err, [&] {
      ensure_dir(dir);
      write_text(dir / kManifestFile, manifest_text(*sub));
      return static_cast<int>(kOk);
    });
  };

  if (fit_cmd->parsed()) {
    if (int rc = record(fit_cmd, fit.out); rc != kOk) return rc;
    return cmd_fit(fit, err);
  }
  if (sim_cmd->parsed()) {
    if (int rc = record(sim_cmd, sim.out); rc != kOk) return rc;
    return cmd_simulate(sim, err);
  }
  if (diag_cmd->parsed()) {
    if (int rc = record(diag_cmd, diag.out); rc != kOk) return rc;
    return cmd_diagnose(diag, err);
  }
  if (det_cmd->parsed()) {
    if (int rc = record(det_cmd, det.out); rc != kOk) return rc;
    return cmd_detect(det, err);
  }
  if (probe_cmd->parsed()) {
    if (int rc = record(probe_cmd, probe.out); rc != kOk) return rc;
    return cmd_probe(probe, err);
  }
  return kUsage;
}

}  // namespace tailfit::cli
