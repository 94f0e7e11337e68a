#ifndef TRAJRL_TOOLS_TRACE_H_
#define TRAJRL_TOOLS_TRACE_H_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajrl/episode.h"

namespace trajrl::cli {

// Per-step record of a single episode: what the planner saw, what it asked
// for, what was executed and what it cost.
nlohmann::json trace_to_json(const eval::EpisodeTrace& trace, const Scene& initial,
                             const std::string& planner, const std::string& config_hash);

// The parts of a trace the plot command needs.
struct PlotTrace {
  Scene initial;
  double layer_spacing = 1.0;
  struct Step {
    Scene scene;
    int progress = 0;
    LatticePoint start;
    std::vector<LatticePoint> executed;  // first layers_moved points of the plan
  };
  std::vector<Step> steps;
  double episode_return = 0.0;
  std::vector<double> rewards;
};

// Throws FormatError on malformed input.
PlotTrace trace_from_json(const nlohmann::json& j);

}  // namespace trajrl::cli

#endif  // TRAJRL_TOOLS_TRACE_H_
