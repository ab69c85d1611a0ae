#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "klfls/model.hpp"
#include "klfls/monitor.hpp"

namespace klfls {

struct TrackConfig {
  // Nominal model: the built-in maneuvering-target system unless a model
  // file is given.
  std::string model_file;
  double T = 0.01;
  double sigma2 = 5.0;
  double alpha = 2.0;
  int L = 20;
  int N = 500;
  std::vector<double> cs = {1e-3, 5e-3};
  std::uint64_t seed = 2;
  std::string init = "zero";  // "zero" | "random"
  bool export_lf = false;
};

struct SysidConfig {
  int trials = 20;
  int N = 1000;
  int L = 50;
  double c = 2e-2;
  double eps = 1e-3;
  int max_iter = 30;
  std::vector<double> alpha_star = {0.1, 0.9};
  std::vector<double> alpha1_range = {0.4, 0.9};
  std::vector<double> alpha2_range = {0.07, 0.13};
  std::uint64_t seed = 1;
};

struct BenchConfig {
  std::vector<int> grid = {8, 16, 32, 64};
  int reps = 10;
  int N = 500;
  double c = 1e-3;
  int n = 2;
  int m = 1;
  double radius = 0.95;
  std::uint64_t seed = 1;
};

struct EquivConfig {
  int instances = 50;
  int N = 100;
  std::vector<double> cs = {0.0, 1e-3, 1e-2};
  int gamma_instances = 100;
  int theta_grid = 20;
  int kl_N = 500;
  std::uint64_t seed = 1;
  bool corrupt_theta = false;  // negative-control hook
  double tol_rel = 1e-6;
  double tol_theta = 1e-10;
  double tol_gamma = 1e-9;
  double tol_kl = 1e-8;
  double tol_zero = 1e-10;
  double tol_lf = 1e-12;
};

TrackConfig parse_track_config(const std::string& json_text);
SysidConfig parse_sysid_config(const std::string& json_text);
BenchConfig parse_bench_config(const std::string& json_text);
EquivConfig parse_equiv_config(const std::string& json_text);
std::string read_file(const std::string& path);

struct CheckResult {
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double bound = 0.0;
};

struct EquivReport {
  std::vector<CheckResult> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

// The four reusable verification suites: reduced-vs-augmented smoother
// agreement, the two gamma routes, per-step KL budget saturation, and the
// zero-budget collapse. The optional monitor accumulates covariance
// positivity statistics across every run performed.
EquivReport run_equiv_suites(const EquivConfig& cfg,
                             PositivityMonitor* monitor = nullptr);

// Benchmark machinery shared by cmd_bench and the scaling checks.
struct BenchPoint {
  int L = 0;
  double mean_arfls = 0.0, sd_arfls = 0.0;
  double mean_rfls = 0.0, sd_rfls = 0.0;
};

struct BenchReport {
  std::vector<BenchPoint> points;
  double slope_arfls = 0.0;
  double slope_rfls = 0.0;
};

BenchReport run_bench(const BenchConfig& cfg);

int cmd_track(const TrackConfig& cfg, const std::string& out_dir);
int cmd_sysid(const SysidConfig& cfg, const std::string& out_dir);
int cmd_bench(const BenchConfig& cfg, const std::string& out_dir);
int cmd_equiv(const EquivConfig& cfg, const std::string& out_dir);

}  // namespace klfls
