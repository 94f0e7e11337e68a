#include "trajrl/episode.h"

#include "trajrl/errors.h"
#include "trajrl/random.h"
#include "trajrl/safety.h"

namespace trajrl::eval {

Actor rl_actor(const policy::PolicyParams& params) {
  return [params](const env::Environment& e) {
    return policy::mean_action(
        params, encode_observation(e.scene(), e.config().lattice.v_max));
  };
}

Actor exhaustive_actor(const search::SearchConfig& search) {
  return [search](const env::Environment& e) {
    const auto& cfg = e.config();
    const Scene& scene = e.scene();
    Trajectory plan;
    try {
      plan = search::plan_exhaustive(scene, cfg.weights, cfg.lattice, search, cfg.safety)
                 .trajectory;
      plan.start = {scene.n0, scene.v0};
    } catch (const NoPathException&) {
      plan = safety::emergency_stop({scene.n0, scene.v0}, cfg.lattice.plan_layers,
                                    cfg.lattice.dv_max);
    }
    return env::encode_action(plan, cfg.lattice);
  };
}

bool EpisodeTrace::safety_stop() const {
  for (const auto& s : steps)
    if (s.info.emergency_stop) return true;
  return false;
}

cost::EpisodeLog EpisodeTrace::log() const {
  cost::EpisodeLog out;
  for (const auto& s : steps) {
    out.rewards.push_back(s.reward);
    out.layers.insert(out.layers.end(), s.info.layer_terms.begin(), s.info.layer_terms.end());
  }
  return out;
}

EpisodeTrace run_episode(env::Environment& environment, const Actor& actor) {
  EpisodeTrace trace;
  while (!environment.done()) {
    TraceStep step;
    step.scene = environment.scene();
    step.progress = environment.progress();
    step.action = actor(environment);
    env::StepOutcome out = environment.step(step.action);
    step.info = std::move(out.info);
    step.reward = out.reward;
    trace.episode_return += out.reward;
    trace.terminal = step.info.terminal;
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

env::EpisodeConfig evaluation_config(env::EpisodeConfig config) {
  config.move_layers = 1;
  config.safety_gating = true;
  return config;
}

CampaignResult run_campaign(const env::EpisodeConfig& config, const Actor& a,
                            const Actor& b, int episodes, std::uint64_t seed,
                            bool keep_traces) {
  if (episodes < 1) throw Error("a campaign needs at least one episode");
  CampaignResult r;
  env::Environment env_a(config), env_b(config);
  auto record = [&](env::Environment& e, const Actor& actor, std::uint64_t s,
                    std::vector<cost::EpisodeMetrics>& metrics,
                    std::vector<EpisodeTrace>& traces, std::vector<env::TerminalKind>& terminals,
                    std::vector<double>& returns, std::vector<std::uint8_t>& stopped, int& stops,
                    int& collisions) {
    e.reset(s);
    EpisodeTrace t = run_episode(e, actor);
    metrics.push_back(cost::aggregate_metrics(t.log()));
    terminals.push_back(t.terminal);
    returns.push_back(t.episode_return);
    stopped.push_back(t.safety_stop() ? 1 : 0);
    if (t.safety_stop()) ++stops;
    if (t.terminal == env::TerminalKind::kCollision) ++collisions;
    if (keep_traces) traces.push_back(std::move(t));
  };
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    r.seeds.push_back(s);
    record(env_a, a, s, r.metrics_a, r.traces_a, r.terminals_a, r.returns_a,
           r.stopped_a, r.safety_stops_a, r.collisions_a);
    record(env_b, b, s, r.metrics_b, r.traces_b, r.terminals_b, r.returns_b,
           r.stopped_b, r.safety_stops_b, r.collisions_b);
  }
  return r;
}

}  // namespace trajrl::eval
