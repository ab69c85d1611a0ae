#include <CLI11.hpp>
#include <cstdio>
#include <optional>
#include <string>

#include "klfls/error.hpp"
#include "klfls/experiments.hpp"

namespace {

std::string load_config(const std::string& path) {
  if (path.empty()) return "";
  return klfls::read_file(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust fixed-lag smoothing experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "seed override");
  };

  auto* track = app.add_subcommand("track", "target-tracking experiment");
  auto* sysid = app.add_subcommand("sysid", "parameter-estimation Monte Carlo");
  auto* bench = app.add_subcommand("bench", "smoother timing sweep");
  auto* equiv = app.add_subcommand("equiv", "equivalence/oracle suites");
  add_common(track);
  add_common(sysid);
  add_common(bench);
  add_common(equiv);

  CLI11_PARSE(app, argc, argv);

  try {
    std::string text = load_config(config_path);
    if (track->parsed()) {
      auto cfg = klfls::parse_track_config(text);
      if (seed) cfg.seed = *seed;
      return klfls::cmd_track(cfg, out_dir);
    }
    if (sysid->parsed()) {
      auto cfg = klfls::parse_sysid_config(text);
      if (seed) cfg.seed = *seed;
      return klfls::cmd_sysid(cfg, out_dir);
    }
    if (bench->parsed()) {
      auto cfg = klfls::parse_bench_config(text);
      if (seed) cfg.seed = *seed;
      return klfls::cmd_bench(cfg, out_dir);
    }
    auto cfg = klfls::parse_equiv_config(text);
    if (seed) cfg.seed = *seed;
    return klfls::cmd_equiv(cfg, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
