#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "klfls/experiments.hpp"
#include "klfls/io.hpp"

using namespace klfls;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("klfls_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

int count_occurrences(const std::string& hay, const std::string& needle) {
  int count = 0;
  size_t pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_CASE("empty table yields a header-only file") {
  Table t;
  t.header = {"a", "b"};
  CHECK(csv_to_string(t) == "a,b\n");
}

TEST_CASE("csv round trip preserves 12 significant digits") {
  Table t;
  t.header = {"v"};
  std::vector<double> values = {1.0 / 3.0, 6.6666666e-6, -123456.789012,
                                0.2918, 1e-14, 2.0};
  for (double v : values) t.rows.push_back({v});
  std::string csv = csv_to_string(t);

  size_t pos = csv.find('\n') + 1;
  for (double v : values) {
    size_t end = csv.find('\n', pos);
    double parsed = std::stod(csv.substr(pos, end - pos));
    CHECK(std::abs(parsed - v) <= 5e-12 * std::max(1.0, std::abs(v)));
    pos = end + 1;
  }
}

TEST_CASE("two series render as two polylines") {
  Series s1{"one", {0, 1, 2}, {0, 1, 4}};
  Series s2{"two", {0, 1, 2}, {1, 3, 9}};
  std::string svg = svg_to_string({s1, s2}, "x", "y");
  CHECK(count_occurrences(svg, "<polyline") == 2);
  CHECK(svg.find("viewBox=\"0 0 800 500\"") != std::string::npos);
  CHECK(svg.find("<text") != std::string::npos);
}

TEST_CASE("config parsing applies defaults and validates") {
  TrackConfig t = parse_track_config("");
  CHECK(t.L == 20);
  CHECK(t.N == 500);
  CHECK(t.cs.size() == 2);

  CHECK_THROWS_AS(parse_track_config(R"({"L": 0})"), Error);
  CHECK_THROWS_AS(parse_track_config(R"({"c": [-1.0]})"), Error);
  CHECK_THROWS_AS(parse_track_config(R"({"model_file": "/nonexistent.json"})"),
                  Error);
  CHECK_THROWS_AS(parse_sysid_config(R"({"trials": 0})"), Error);
  CHECK_THROWS_AS(parse_bench_config(R"({"grid": []})"), Error);

  BenchConfig b = parse_bench_config(R"({"grid": [4, 8], "reps": 2, "N": 60})");
  CHECK(b.grid.size() == 2);
  CHECK(b.reps == 2);
}

TEST_CASE("equiv command: green by default, red under the corruption hook") {
  EquivConfig cfg = parse_equiv_config(
      R"({"instances": 4, "N": 60, "gamma_instances": 10, "kl_N": 40})");
  std::string out = fresh_dir("equiv");
  CHECK(cmd_equiv(cfg, out) == 0);
  CHECK(fs::exists(out + "/equiv.csv"));

  cfg.corrupt_theta = true;
  std::string out2 = fresh_dir("equiv_bad");
  CHECK(cmd_equiv(cfg, out2) != 0);
}

TEST_CASE("track command writes the expected artifacts") {
  TrackConfig cfg = parse_track_config(R"({"N": 80, "L": 5, "c": [1e-3]})");
  std::string out = fresh_dir("track");
  CHECK(cmd_track(cfg, out) == 0);
  for (const char* f : {"variances.csv", "trajectory.csv", "rmse.csv"})
    CHECK(fs::exists(out + "/" + f));
  CHECK(fs::exists(out + "/variances_c0.001.svg"));

  std::string rmse = read_file(out + "/rmse.csv");
  CHECK(rmse.find("rmse_lat") != std::string::npos);
  CHECK(count_occurrences(rmse, "RFLS") == 1);
  CHECK(count_occurrences(rmse, "FLS") == 2);  // substring of RFLS once
}

TEST_CASE("zero budget collapses the two rmse rows to the same values") {
  TrackConfig cfg = parse_track_config(R"({"N": 80, "L": 5, "c": [0.0]})");
  std::string out = fresh_dir("track0");
  CHECK(cmd_track(cfg, out) == 0);
  std::string rmse = read_file(out + "/rmse.csv");
  // rows: header, RFLS, FLS; identical numeric suffix after the algo name
  auto line = [&](int k) {
    size_t pos = 0;
    for (int i = 0; i < k; ++i) pos = rmse.find('\n', pos) + 1;
    return rmse.substr(pos, rmse.find('\n', pos) - pos);
  };
  std::string r1 = line(1), r2 = line(2);
  CHECK(r1.substr(r1.find("RFLS") + 4) == r2.substr(r2.find("FLS") + 3));
}

TEST_CASE("commands are byte-deterministic given config and seed") {
  TrackConfig cfg = parse_track_config(R"({"N": 70, "L": 4, "c": [2e-3]})");
  std::string o1 = fresh_dir("det1"), o2 = fresh_dir("det2");
  CHECK(cmd_track(cfg, o1) == 0);
  CHECK(cmd_track(cfg, o2) == 0);
  for (const char* f : {"variances.csv", "trajectory.csv", "rmse.csv"})
    CHECK(read_file(o1 + "/" + std::string(f)) ==
          read_file(o2 + "/" + std::string(f)));

  SysidConfig sc = parse_sysid_config(
      R"({"trials": 2, "N": 150, "L": 8, "max_iter": 2})");
  std::string s1 = fresh_dir("det3"), s2 = fresh_dir("det4");
  CHECK(cmd_sysid(sc, s1) == 0);
  CHECK(cmd_sysid(sc, s2) == 0);
  CHECK(read_file(s1 + "/trials.csv") == read_file(s2 + "/trials.csv"));
  CHECK(read_file(s1 + "/summary.csv") == read_file(s2 + "/summary.csv"));
}

TEST_CASE("bench command emits one row per algorithm and lag") {
  BenchConfig cfg = parse_bench_config(R"({"grid": [6], "reps": 1, "N": 40})");
  std::string out = fresh_dir("bench");
  CHECK(cmd_bench(cfg, out) == 0);
  std::string bench = read_file(out + "/bench.csv");
  CHECK(count_occurrences(bench, "ARFLS") == 1);
  CHECK(count_occurrences(bench, "RFLS") == 2);  // ARFLS contains RFLS
  CHECK(fs::exists(out + "/slopes.csv"));
  CHECK(fs::exists(out + "/bench.svg"));
}
