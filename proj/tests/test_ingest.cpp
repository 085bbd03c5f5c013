#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "tailfit/errors.hpp"
#include "tailfit/ingest.hpp"
#include "tailfit/simulator.hpp"

using namespace tailfit;

namespace {

LatencyLog parse_text(const std::string& text, ParseOptions options = {}) {
  std::istringstream in(text);
  return parse_log(in, options);
}

std::size_t error_line(const std::string& text) {
  try {
    parse_text(text);
  } catch (const FormatError& e) {
    return e.line();
  }
  return 0;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("minimal logs") {
  const auto log = parse_text("run,duration_s\n0,1.5\n");
  REQUIRE(log.rows.size() == 1);
  CHECK(log.rows[0].run == 0);
  CHECK(log.rows[0].duration_s == 1.5);
  CHECK_FALSE(log.has_phase);
  CHECK(durations(log) == std::vector<double>{1.5});

  CHECK(parse_text("run,duration_s\n").rows.empty());
  CHECK(parse_text("\n  run , duration_s \r\n\n 3 , 0 \r\n").rows.size() == 1);
}

TEST_CASE("malformed rows name their line") {
  CHECK(error_line("run,duration_s\n0,abc\n") == 2);
  CHECK(error_line("run,duration_s\n0,1\n1,-2\n") == 3);
  CHECK(error_line("run,duration_s\n0,1\n1,nan\n") == 3);
  CHECK(error_line("run,duration_s\n0,1\n1,inf\n") == 3);
  CHECK(error_line("run,duration_s\n0,1,2\n") == 2);
  CHECK(error_line("run,duration_s\nx,1\n") == 2);
  CHECK(error_line("run,duration_s\n-1,1\n") == 2);
  CHECK(error_line("run,duration_s\n0,1\n\n0,2\n") == 4);
  CHECK_THROWS_WITH_AS(parse_text("run,duration_s\n0,abc\n"), doctest::Contains("line 2"),
                       FormatError);
}

TEST_CASE("header is required") {
  CHECK(error_line("0,1.0\n1,2.0\n") == 1);
  CHECK(error_line("duration_s\n1.0\n") == 1);
  CHECK(error_line("run,duration\n0,1\n") == 1);
  CHECK_THROWS_AS(parse_text(""), FormatError);
  CHECK_THROWS_AS(parse_log("/nonexistent/tailfit.csv"), FormatError);
}

TEST_CASE("skipping bad rows") {
  const auto log = parse_text("run,duration_s\n0,1\n1,abc\n2,3\n2,4\n3,-1\n", {true});
  REQUIRE(log.rows.size() == 2);
  CHECK(durations(log) == std::vector<double>{1.0, 3.0});
  REQUIRE(log.skipped.size() == 3);
  CHECK(log.skipped[0].rfind("line 3:", 0) == 0);
  CHECK(log.skipped[1].rfind("line 5:", 0) == 0);
  CHECK(log.skipped[2].rfind("line 6:", 0) == 0);
}

TEST_CASE("phase labels") {
  const auto log = parse_text(
      "run,duration_s,phase\n0,0.1,meta_open\n0,2.0,data_write\n1,0.2,meta_open\n1,3.0,data_write\n");
  CHECK(log.has_phase);
  CHECK(phases(log) == std::vector<std::string>{"meta_open", "data_write"});
  CHECK(durations(log, std::string("data_write")) == std::vector<double>{2.0, 3.0});
  CHECK(durations(log, std::string("missing")).empty());
  CHECK(durations(log).size() == 4);
  CHECK(error_line("run,duration_s,phase\n0,1,a\n0,2,a\n") == 3);
}

TEST_CASE("number formatting round-trips exactly") {
  for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 3.3807, 1e-300, 1e300, 123456.789,
                   std::nextafter(1.0, 2.0), std::numeric_limits<double>::denorm_min()}) {
    CHECK(std::strtod(format_real(v).c_str(), nullptr) == v);
    CHECK(durations(parse_text("run,duration_s\n0," + format_real(v) + "\n"))[0] == v);
  }
  CHECK(format_real(0.5) == "0.5");
  CHECK(format_real(3.0) == "3");
}

TEST_CASE("simulated campaigns survive a file round-trip") {
  SimConfig cfg;
  cfg.nodes = 16;
  cfg.runs = 400;
  cfg.seed = 11;
  const auto obs = simulate_campaign(cfg);
  const auto path = temp_path("tailfit_roundtrip.csv").string();
  write_log(path, to_log(obs));
  const auto back = parse_log(path);
  CHECK(back.rows.size() == 400);
  CHECK(durations(back) == obs.durations);
  for (std::size_t i = 0; i < back.rows.size(); ++i) CHECK(back.rows[i].run == i);
  CHECK(back.source_path == path);
  CHECK(back.source_time.size() == 20);
  CHECK(back.source_time.back() == 'Z');

  std::ostringstream a;
  std::ostringstream b;
  write_log(a, to_log(obs));
  write_log(b, back);
  CHECK(a.str() == b.str());
  std::filesystem::remove(path);
}

TEST_CASE("service-time files") {
  const auto path = temp_path("tailfit_service.csv").string();
  {
    std::ofstream out(path);
    out << "duration_s\n1.5\n2.5\n";
  }
  CHECK(read_durations(path) == std::vector<double>{1.5, 2.5});
  {
    std::ofstream out(path);
    out << "run,duration_s\n0,4\n1,5\n";
  }
  CHECK(read_durations(path) == std::vector<double>{4.0, 5.0});
  {
    std::ofstream out(path);
    out << "duration_s\n1.5\n-1\n";
  }
  CHECK_THROWS_AS(read_durations(path), FormatError);
  std::filesystem::remove(path);
}
