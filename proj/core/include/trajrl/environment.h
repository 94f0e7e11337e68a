#ifndef TRAJRL_ENVIRONMENT_H_
#define TRAJRL_ENVIRONMENT_H_

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "trajrl/cost.h"
#include "trajrl/lattice.h"
#include "trajrl/safety.h"
#include "trajrl/scene.h"

namespace trajrl::env {

struct EpisodeConfig {
  LatticeConfig lattice;
  double p_obstacle = 0.5;
  int max_steps = 60;    // layer of the wall, counted from the start
  int move_layers = 3;   // layers executed before replanning
  double v_init = 2.0;
  double speed_patch_mean = 4.0;  // mean length of a speed zone, layers
  bool safety_gating = false;
  std::uint64_t rng_seed = 0;
  cost::CostWeights weights;
  // Carries the cost options shared by rewards and the centripetal bound.
  safety::SafetyConfig safety;

  void validate() const;
  const cost::CostOptions& cost_options() const { return safety.cost_options; }
};

enum class TerminalKind { kRunning, kSuccess, kCollision, kNoPath };
std::string_view terminal_name(TerminalKind kind);
std::optional<TerminalKind> terminal_from_name(std::string_view name);

struct StepInfo {
  TerminalKind terminal = TerminalKind::kRunning;
  cost::CostReport cost;             // over executed layers
  std::vector<cost::LayerTerms> layer_terms;  // one entry per executed layer
  Trajectory proposed;               // decoded action
  Trajectory planned;                // after the safety constraint
  bool projected = false;
  bool emergency_stop = false;       // NoPathException was raised
  int layers_moved = 0;
};

struct StepOutcome {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// One generated road layer.
struct RoadRow {
  std::vector<std::uint8_t> occupancy;
  std::vector<double> speed_limits;
};

// Produces road layers one at a time. Obstacles are i.i.d. Bernoulli per
// cell; a row that would leave no admissible lateral path (including a fully
// blocked row) gets one uniformly chosen reachable cell cleared. Speed limits
// come in full-width zones of geometric length. Layers at or beyond the wall
// are fully occupied.
class RoadGenerator {
 public:
  RoadGenerator(const EpisodeConfig& config, std::uint64_t seed);

  RoadRow next();
  int next_layer() const { return next_layer_; }

 private:
  EpisodeConfig config_;
  std::mt19937_64 rng_;
  int next_layer_ = 1;
  std::vector<bool> reachable_;
  int zone_left_ = 0;
  double zone_limit_ = 0.0;
};

// Initial observation window of a fresh road drawn from rng.
Scene generate_scene(const EpisodeConfig& config, std::mt19937_64& rng);

// Cumulative sum of scaled deltas from (n0, v0), clamped to the road edges
// and to [0, v_max]. raw = (dn_1..dn_H, dv_1..dv_H), entries clamped to [-1, 1].
Trajectory decode_action(std::span<const double> raw, double n0, double v0,
                         const LatticeConfig& lattice);
// Inverse of decode_action for trajectories inside the motion bounds.
std::vector<double> encode_action(const Trajectory& trajectory,
                                  const LatticeConfig& lattice);

class Environment {
 public:
  explicit Environment(EpisodeConfig config);
  // A fixed road: the given window followed by a wall.
  static Environment from_scene(EpisodeConfig config, const Scene& scene);

  std::vector<double> reset();
  std::vector<double> reset(std::uint64_t seed);
  StepOutcome step(std::span<const double> raw_action);

  const Scene& scene() const { return scene_; }
  const EpisodeConfig& config() const { return config_; }
  bool done() const { return done_; }
  int steps() const { return steps_; }
  int progress() const { return progress_; }
  int wall_layer() const;
  bool wall_in_view() const;
  std::size_t observation_size() const;
  std::size_t action_size() const;

 private:
  void rebuild_scene();
  RoadRow next_row();

  EpisodeConfig config_;
  std::mt19937_64 rng_;
  std::optional<RoadGenerator> generator_;
  std::optional<Scene> fixed_;  // set for fixed roads
  std::deque<RoadRow> window_;
  std::size_t fixed_next_ = 0;
  Scene scene_;
  double n0_ = 0.0;
  double v0_ = 0.0;
  int progress_ = 0;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace trajrl::env

#endif  // TRAJRL_ENVIRONMENT_H_
