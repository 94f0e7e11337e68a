#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.h"
#include "trajrl/errors.h"
#include "trajrl/io.h"

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

}  // namespace

int main(int argc, char** argv) {
  namespace cli = trajrl::cli;
  CLI::App app{"Lattice trajectory planning with a PPO policy and an exhaustive baseline"};
  app.require_subcommand(1);

  std::string config_path, resume, ckpt, out_dir, trace, scene, planner, replay_config,
      replay_out;
  int episodes = 0;
  std::uint64_t seed = 0;
  cli::BenchOptions bench;

  auto* train = app.add_subcommand("train", "Train the policy");
  train->add_option("--config", config_path, "Run configuration (YAML)")->required()->check(CLI::ExistingFile);
  train->add_option("--resume", resume, "Checkpoint to continue from")->check(CLI::ExistingFile);

  auto* compare = app.add_subcommand("compare", "Compare both planners on matched seeds");
  compare->add_option("--ckpt", ckpt, "Trained checkpoint")->required()->check(CLI::ExistingFile);
  compare->add_option("--episodes", episodes, "Episodes per planner")->required();
  compare->add_option("--seed", seed, "Campaign seed")->required();
  compare->add_option("--out", out_dir, "Output directory")->required();

  auto* bench_cmd = app.add_subcommand("bench", "Query latency of both planners");
  bench_cmd->add_option("--ckpt", ckpt, "Trained checkpoint")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--scenes", bench.scenes, "Distinct scenes");
  bench_cmd->add_option("--queries", bench.queries, "Minimum timed queries per planner");
  bench_cmd->add_option("--seed", bench.seed, "Scene seed");
  bench_cmd->add_option("--out", out_dir, "Also write the report as latency.csv here");

  auto* plot = app.add_subcommand("plot", "Path and velocity plots of an episode trace");
  plot->add_option("--trace", trace, "Trace file from replay")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", out_dir, "Output directory")->required();

  auto* replay = app.add_subcommand("replay", "Run one episode on a fixed scene");
  replay->add_option("--scene", scene, "Scene file")->required()->check(CLI::ExistingFile);
  replay->add_option("--planner", planner, "rl or exhaustive")
      ->required()
      ->check(CLI::IsMember({"rl", "exhaustive"}));
  replay->add_option("--ckpt", ckpt, "Trained checkpoint (rl planner)")->check(CLI::ExistingFile);
  replay->add_option("--config", replay_config, "Run configuration when no checkpoint is given")
      ->check(CLI::ExistingFile);
  replay->add_option("--out", replay_out, "Trace file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  auto opt = [](const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::filesystem::path>(s);
  };
  try {
    if (*train) {
      cli::cmd_train(config_path, opt(resume), std::cout);
    } else if (*compare) {
      cli::cmd_compare(ckpt, episodes, seed, out_dir, std::cout);
    } else if (*bench_cmd) {
      const auto report = cli::cmd_bench(ckpt, bench, std::cout);
      if (!out_dir.empty()) trajrl::write_file_atomic(std::filesystem::path(out_dir) / "latency.csv", report.text);
    } else if (*plot) {
      const auto a = cli::cmd_plot(trace, out_dir);
      std::cout << "wrote " << a.path_svg.string() << " and " << a.velocity_svg.string() << '\n';
    } else if (*replay) {
      const auto j = cli::cmd_replay(scene, planner, opt(ckpt), opt(replay_config));
      const std::string text = j.dump(1) + "\n";
      if (replay_out.empty()) {
        std::cout << text;
      } else {
        trajrl::write_file_atomic(replay_out, text);
      }
    }
  } catch (const cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return 0;
}
