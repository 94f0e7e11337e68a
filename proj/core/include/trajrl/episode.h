#ifndef TRAJRL_EPISODE_H_
#define TRAJRL_EPISODE_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "trajrl/environment.h"
#include "trajrl/metrics.h"
#include "trajrl/policy.h"
#include "trajrl/search.h"

namespace trajrl::eval {

// Chooses the raw action for the environment's current scene.
using Actor = std::function<std::vector<double>(const env::Environment&)>;

// Deterministic policy mean.
Actor rl_actor(const policy::PolicyParams& params);
// Cheapest feasible lattice trajectory, encoded as an action. When nothing is
// feasible it proposes a full stop and leaves the fallback to the
// environment.
Actor exhaustive_actor(const search::SearchConfig& search);

struct TraceStep {
  Scene scene;  // what the planner saw
  int progress = 0;  // layers travelled before this step
  std::vector<double> action;
  env::StepInfo info;
  double reward = 0.0;
};

struct EpisodeTrace {
  std::vector<TraceStep> steps;
  double episode_return = 0.0;
  env::TerminalKind terminal = env::TerminalKind::kRunning;

  bool safety_stop() const;  // some step fell back to the emergency stop
  cost::EpisodeLog log() const;
};

// Runs the environment from its current state until the episode ends.
EpisodeTrace run_episode(env::Environment& environment, const Actor& actor);

// Evaluation settings: one executed layer per step and the safety
// constraint on.
env::EpisodeConfig evaluation_config(env::EpisodeConfig config);

struct CampaignResult {
  std::vector<std::uint64_t> seeds;
  std::vector<cost::EpisodeMetrics> metrics_a, metrics_b;
  std::vector<EpisodeTrace> traces_a, traces_b;  // kept only when requested
  std::vector<env::TerminalKind> terminals_a, terminals_b;
  std::vector<double> returns_a, returns_b;
  std::vector<std::uint8_t> stopped_a, stopped_b;  // episode used a safety stop
  int safety_stops_a = 0, safety_stops_b = 0;
  int collisions_a = 0, collisions_b = 0;
};

// Episode i of both planners uses seed derive_seed(seed, i).
CampaignResult run_campaign(const env::EpisodeConfig& config, const Actor& a,
                            const Actor& b, int episodes, std::uint64_t seed,
                            bool keep_traces = false);

}  // namespace trajrl::eval

#endif  // TRAJRL_EPISODE_H_
