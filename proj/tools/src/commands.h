#ifndef TRAJRL_TOOLS_COMMANDS_H_
#define TRAJRL_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "run_config.h"
#include "trajrl/checkpoint.h"
#include "trajrl/errors.h"
#include "trajrl/episode.h"
#include "trajrl/metrics.h"
#include "trajrl/search.h"

namespace trajrl::cli {

namespace fs = std::filesystem;

// Raised for invalid argument combinations (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct TrainArtifacts {
  fs::path checkpoint;
  fs::path history_csv;
  fs::path curve_svg;
  fs::path config_copy;
  policy::TrainingState state;
};

// Checkpoints every `checkpoint_every` updates and at the end.
TrainArtifacts run_training(const RunConfig& config,
                            std::optional<policy::Checkpoint> resume, std::ostream& log,
                            int checkpoint_every = 10);
TrainArtifacts cmd_train(const fs::path& config_path,
                         const std::optional<fs::path>& resume, std::ostream& log);

// Rows: episode, env, seed, return, length, terminal, env_steps, rolling_median.
std::string history_csv(const std::vector<policy::EpisodeRecord>& episodes, int window);

struct CompareReport {
  cost::Comparison table;  // planner a = exhaustive, b = rl
  eval::CampaignResult campaign;
  std::string summary;
};

CompareReport run_compare(const RunConfig& config, const policy::PolicyParams& params,
                          int episodes, std::uint64_t seed);
CompareReport cmd_compare(const fs::path& checkpoint, int episodes, std::uint64_t seed,
                          const fs::path& out_dir, std::ostream& log);

struct BenchOptions {
  int scenes = 200;
  int queries = 200;
  std::uint64_t seed = 0;
};

struct BenchReport {
  search::Latency rl;
  search::Latency exhaustive;
  double ratio = 0.0;  // exhaustive / rl
  std::string text;
};

BenchReport run_bench(const RunConfig& config, const policy::PolicyParams& params,
                      const BenchOptions& options);
BenchReport cmd_bench(const fs::path& checkpoint, const BenchOptions& options,
                      std::ostream& log);

struct PlotArtifacts {
  fs::path path_svg, path_csv, spline_csv, velocity_csv, velocity_svg;
  std::vector<std::pair<double, double>> points;  // (s, n) of driven layers
  std::vector<double> speeds;                     // speed at each point
  std::vector<std::pair<double, double>> spline;  // (s, n) samples
};

inline constexpr int kSplineSamples = 100;

PlotArtifacts cmd_plot(const fs::path& trace, const fs::path& out_dir);

// Single gated episode on the fixed scene. The rl planner needs params.
nlohmann::json run_replay(const Scene& scene, const std::string& planner,
                          const RunConfig& config,
                          const std::optional<policy::PolicyParams>& params);
nlohmann::json cmd_replay(const fs::path& scene, const std::string& planner,
                          const std::optional<fs::path>& checkpoint,
                          const std::optional<fs::path>& config);

// Parameters and configuration stored in a checkpoint.
std::pair<RunConfig, policy::Checkpoint> load_trained(const fs::path& checkpoint);

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const RunConfig& config, const std::vector<fs::path>& files);

}  // namespace trajrl::cli

#endif  // TRAJRL_TOOLS_COMMANDS_H_
