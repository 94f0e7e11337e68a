#include "trace.h"

#include "trajrl/errors.h"

namespace trajrl::cli {

namespace {

using nlohmann::json;

json trajectory_json(const Trajectory& t) {
  json points = json::array();
  for (const auto& p : t.points) points.push_back({p.n, p.v});
  return {{"start", {t.start.n, t.start.v}}, {"points", points}};
}

json cost_json(const cost::CostReport& r) {
  json terms = json::object();
  for (auto t : cost::kAllTerms) terms[std::string(cost::term_name(t))] = r[t];
  return {{"total", r.total}, {"terms", terms}};
}

LatticePoint point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("trace point must be [n, v]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json trace_to_json(const eval::EpisodeTrace& trace, const Scene& initial,
                   const std::string& planner, const std::string& config_hash) {
  json steps = json::array();
  for (const auto& s : trace.steps) {
    json layers = json::array();
    for (const auto& l : s.info.layer_terms) layers.push_back(l);
    steps.push_back({{"progress", s.progress},
                     {"scene", scene_to_text(s.scene)},
                     {"action", s.action},
                     {"proposed", trajectory_json(s.info.proposed)},
                     {"planned", trajectory_json(s.info.planned)},
                     {"projected", s.info.projected},
                     {"emergency_stop", s.info.emergency_stop},
                     {"layers_moved", s.info.layers_moved},
                     {"reward", s.reward},
                     {"terminal", env::terminal_name(s.info.terminal)},
                     {"cost", cost_json(s.info.cost)},
                     {"layer_terms", layers}});
  }
  return {{"format", "trajrl-trace"},
          {"version", 1},
          {"config_hash", config_hash},
          {"planner", planner},
          {"scene", scene_to_text(initial)},
          {"episode_return", trace.episode_return},
          {"terminal", env::terminal_name(trace.terminal)},
          {"steps", steps}};
}

PlotTrace trace_from_json(const json& j) {
  try {
    if (j.value("format", "") != "trajrl-trace") throw FormatError("not a trajrl trace");
    PlotTrace t;
    t.initial = scene_from_text(j.at("scene").get<std::string>());
    t.episode_return = j.at("episode_return").get<double>();
    t.layer_spacing = j.value("layer_spacing", 1.0);
    for (const auto& s : j.at("steps")) {
      PlotTrace::Step step;
      step.scene = scene_from_text(s.at("scene").get<std::string>());
      step.progress = s.at("progress").get<int>();
      const auto& planned = s.at("planned");
      step.start = {step.scene.n0, step.scene.v0};
      const int moved = s.at("layers_moved").get<int>();
      const auto& pts = planned.at("points");
      if (moved < 0 || moved > static_cast<int>(pts.size()))
        throw FormatError("layers_moved out of range");
      for (int i = 0; i < moved; ++i) step.executed.push_back(point_from(pts[static_cast<std::size_t>(i)]));
      t.rewards.push_back(s.at("reward").get<double>());
      t.steps.push_back(std::move(step));
    }
    return t;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed trace: ") + e.what());
  }
}

}  // namespace trajrl::cli
