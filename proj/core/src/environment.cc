#include "trajrl/environment.h"

#include <algorithm>
#include <cmath>

#include "trajrl/errors.h"

namespace trajrl::env {

void EpisodeConfig::validate() const {
  lattice.validate();
  safety.validate();
  weights.validate();
  if (!(p_obstacle >= 0 && p_obstacle <= 1)) throw Error("p_obstacle must be in [0, 1]");
  if (max_steps < 1) throw Error("max_steps must be >= 1");
  if (move_layers < 1 || move_layers > lattice.plan_layers)
    throw Error("move_layers must be in [1, plan_layers]");
  if (v_init < 0 || v_init > lattice.v_max) throw Error("v_init must be in [0, v_max]");
  if (!(speed_patch_mean >= 1)) throw Error("speed_patch_mean must be >= 1");
}

std::string_view terminal_name(TerminalKind kind) {
  switch (kind) {
    case TerminalKind::kRunning: return "running";
    case TerminalKind::kSuccess: return "success";
    case TerminalKind::kCollision: return "collision";
    case TerminalKind::kNoPath: return "no_path";
  }
  return "?";
}

std::optional<TerminalKind> terminal_from_name(std::string_view name) {
  for (auto k : {TerminalKind::kRunning, TerminalKind::kSuccess,
                 TerminalKind::kCollision, TerminalKind::kNoPath})
    if (terminal_name(k) == name) return k;
  return std::nullopt;
}

RoadGenerator::RoadGenerator(const EpisodeConfig& config, std::uint64_t seed)
    : config_(config),
      rng_(seed),
      reachable_(static_cast<std::size_t>(config.lattice.lanes), false) {
  reachable_[static_cast<std::size_t>(config.lattice.lanes / 2)] = true;
}

RoadRow RoadGenerator::next() {
  const int lanes = config_.lattice.lanes;
  const int reach = config_.lattice.dn_max;
  RoadRow row;
  row.occupancy.assign(static_cast<std::size_t>(lanes), 1);

  if (zone_left_ == 0) {
    std::geometric_distribution<int> length(1.0 / config_.speed_patch_mean);
    std::uniform_int_distribution<int> limit(
        1, std::max(1, static_cast<int>(std::floor(config_.lattice.v_max))));
    zone_left_ = 1 + length(rng_);
    zone_limit_ = limit(rng_);
  }
  --zone_left_;
  row.speed_limits.assign(static_cast<std::size_t>(lanes), zone_limit_);

  const int layer = next_layer_++;
  if (layer >= config_.max_steps) {
    std::fill(reachable_.begin(), reachable_.end(), false);
    return row;
  }

  std::bernoulli_distribution obstacle(config_.p_obstacle);
  for (auto& cell : row.occupancy) cell = obstacle(rng_) ? 1 : 0;

  // Cells that can be entered from the reachable part of the previous row.
  std::vector<int> candidates;
  for (int c = 0; c < lanes; ++c) {
    for (int d = -reach; d <= reach; ++d) {
      const int from = c + d;
      if (from >= 0 && from < lanes && reachable_[static_cast<std::size_t>(from)]) {
        candidates.push_back(c);
        break;
      }
    }
  }
  const bool any_free_candidate = std::any_of(candidates.begin(), candidates.end(), [&](int c) {
    return row.occupancy[static_cast<std::size_t>(c)] == 0;
  });
  if (!any_free_candidate && !candidates.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    row.occupancy[static_cast<std::size_t>(candidates[pick(rng_)])] = 0;
  }

  std::vector<bool> next(static_cast<std::size_t>(lanes), false);
  for (int c : candidates)
    if (row.occupancy[static_cast<std::size_t>(c)] == 0) next[static_cast<std::size_t>(c)] = true;
  reachable_ = std::move(next);
  return row;
}

Scene generate_scene(const EpisodeConfig& config, std::mt19937_64& rng) {
  RoadGenerator gen(config, rng());
  const auto& lattice = config.lattice;
  Scene scene(lattice.lanes, lattice.sensor_layers);
  for (int r = 0; r < lattice.sensor_layers; ++r) {
    const RoadRow row = gen.next();
    for (int c = 0; c < lattice.lanes; ++c) {
      scene.set_occupied(r, c, row.occupancy[static_cast<std::size_t>(c)] != 0);
      scene.set_speed_limit(r, c, row.speed_limits[static_cast<std::size_t>(c)]);
    }
  }
  scene.n0 = start_offset(lattice.lanes);
  scene.v0 = config.v_init;
  return scene;
}

Trajectory decode_action(std::span<const double> raw, double n0, double v0,
                         const LatticeConfig& lattice) {
  const std::size_t h = static_cast<std::size_t>(lattice.plan_layers);
  if (raw.size() != 2 * h)
    throw ShapeMismatch("action must have 2 * plan_layers entries");
  const double edge = road_half_width(lattice.lanes);
  Trajectory t{{n0, v0}, {}};
  t.points.reserve(h);
  double n = n0, v = v0;
  for (std::size_t j = 0; j < h; ++j) {
    n = std::clamp(n + lattice.dn_max * std::clamp(raw[j], -1.0, 1.0), -edge, edge);
    v = std::clamp(v + lattice.dv_max * std::clamp(raw[h + j], -1.0, 1.0), 0.0,
                   lattice.v_max);
    t.points.push_back({n, v});
  }
  return t;
}

std::vector<double> encode_action(const Trajectory& trajectory,
                                  const LatticeConfig& lattice) {
  const std::size_t h = trajectory.points.size();
  std::vector<double> raw(2 * h);
  LatticePoint prev = trajectory.start;
  for (std::size_t j = 0; j < h; ++j) {
    const auto& p = trajectory.points[j];
    raw[j] = std::clamp((p.n - prev.n) / lattice.dn_max, -1.0, 1.0);
    raw[h + j] = std::clamp((p.v - prev.v) / lattice.dv_max, -1.0, 1.0);
    prev = p;
  }
  return raw;
}

Environment::Environment(EpisodeConfig config)
    : config_(std::move(config)), rng_(config_.rng_seed) {
  config_.validate();
}

Environment Environment::from_scene(EpisodeConfig config, const Scene& scene) {
  config.lattice.lanes = scene.lanes;
  config.lattice.sensor_layers = scene.layers;
  Environment env(std::move(config));
  env.fixed_ = scene;
  return env;
}

int Environment::wall_layer() const {
  return fixed_ ? fixed_->layers + 1 : config_.max_steps;
}

bool Environment::wall_in_view() const {
  return wall_layer() - progress_ <= config_.lattice.sensor_layers;
}

std::size_t Environment::observation_size() const {
  return trajrl::observation_size(config_.lattice.lanes, config_.lattice.sensor_layers);
}

std::size_t Environment::action_size() const {
  return 2 * static_cast<std::size_t>(config_.lattice.plan_layers);
}

RoadRow Environment::next_row() {
  if (generator_) return generator_->next();
  const int lanes = config_.lattice.lanes;
  RoadRow row;
  if (fixed_next_ < static_cast<std::size_t>(fixed_->layers)) {
    const int r = static_cast<int>(fixed_next_++);
    for (int c = 0; c < lanes; ++c) {
      row.occupancy.push_back(fixed_->occupied(r, c) ? 1 : 0);
      row.speed_limits.push_back(fixed_->speed_limit(r, c));
    }
  } else {
    const int last = fixed_->layers - 1;
    for (int c = 0; c < lanes; ++c) {
      row.occupancy.push_back(1);
      row.speed_limits.push_back(fixed_->speed_limit(last, c));
    }
  }
  return row;
}

void Environment::rebuild_scene() {
  const auto& lattice = config_.lattice;
  Scene s(lattice.lanes, lattice.sensor_layers);
  for (int r = 0; r < lattice.sensor_layers; ++r) {
    const RoadRow& row = window_[static_cast<std::size_t>(r)];
    for (int c = 0; c < lattice.lanes; ++c) {
      s.set_occupied(r, c, row.occupancy[static_cast<std::size_t>(c)] != 0);
      s.set_speed_limit(r, c, row.speed_limits[static_cast<std::size_t>(c)]);
    }
  }
  s.n0 = n0_;
  s.v0 = v0_;
  scene_ = std::move(s);
}

std::vector<double> Environment::reset(std::uint64_t seed) {
  rng_.seed(seed);
  return reset();
}

std::vector<double> Environment::reset() {
  window_.clear();
  if (fixed_) {
    fixed_next_ = 0;
    n0_ = fixed_->n0;
    v0_ = fixed_->v0;
  } else {
    generator_.emplace(config_, rng_());
    n0_ = start_offset(config_.lattice.lanes);
    v0_ = config_.v_init;
  }
  for (int r = 0; r < config_.lattice.sensor_layers; ++r) window_.push_back(next_row());
  progress_ = 0;
  steps_ = 0;
  done_ = false;
  rebuild_scene();
  return encode_observation(scene_, config_.lattice.v_max);
}

StepOutcome Environment::step(std::span<const double> raw_action) {
  if (done_) throw EpisodeFinished();
  const auto& lattice = config_.lattice;
  StepOutcome out;
  StepInfo& info = out.info;

  info.proposed = decode_action(raw_action, n0_, v0_, lattice);
  info.planned = info.proposed;
  if (config_.safety_gating) {
    try {
      auto c = safety::constrain(info.proposed, scene_, lattice, config_.safety);
      info.planned = std::move(c.trajectory);
      info.projected = c.projected;
    } catch (const NoPathException&) {
      info.planned = safety::emergency_stop({n0_, v0_}, lattice.plan_layers, lattice.dv_max);
      info.emergency_stop = true;
    }
  }

  // Executed from the true vehicle state, whatever lattice state the
  // constraint snapped to.
  const Trajectory executed{{n0_, v0_}, info.planned.points};
  const std::span<const LatticePoint> window(executed.points.data(),
                                             static_cast<std::size_t>(config_.move_layers));
  const Reach reach = reach_of(executed.start, window, lattice.halt_speed);
  int moved = reach.layers;
  bool collided = false;
  for (int j = 0; j < reach.layers; ++j) {
    if (scene_.occupied(j, lane_of(window[j].n, lattice.lanes))) {
      collided = true;
      moved = j + 1;
      break;
    }
  }

  const auto table =
      cost::evaluate_terms(executed, scene_, lattice, config_.cost_options());
  info.cost = cost::summarize(table, config_.weights, 0, moved);
  for (int i = 0; i < moved; ++i) info.layer_terms.push_back(table.layer(i));
  info.layers_moved = moved;

  if (moved > 0) {
    n0_ = window[moved - 1].n;
    v0_ = window[moved - 1].v;
  } else {
    v0_ = window[0].v;
  }
  for (int i = 0; i < moved; ++i) {
    window_.pop_front();
    window_.push_back(next_row());
  }
  progress_ += moved;
  ++steps_;
  rebuild_scene();

  cost::Outcome outcome = cost::Outcome::kRunning;
  if (collided) {
    info.terminal = TerminalKind::kCollision;
    outcome = cost::Outcome::kFailure;
  } else if (reach.halted) {
    if (wall_in_view()) {
      info.terminal = TerminalKind::kSuccess;
      outcome = cost::Outcome::kSuccess;
    } else {
      info.terminal = TerminalKind::kNoPath;
      outcome = cost::Outcome::kFailure;
    }
  }
  out.reward = cost::step_reward(outcome, info.cost, config_.weights);
  out.done = info.terminal != TerminalKind::kRunning;
  done_ = out.done;
  out.observation = encode_observation(scene_, lattice.v_max);
  return out;
}

}  // namespace trajrl::env
