#ifndef TRAJRL_METRICS_H_
#define TRAJRL_METRICS_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "trajrl/cost.h"

namespace trajrl::cost {

// What an episode leaves behind for metric aggregation: the reward of every
// step and the term values of every executed layer.
struct EpisodeLog {
  std::vector<double> rewards;
  std::vector<LayerTerms> layers;
};

struct EpisodeMetrics {
  double step_reward = 0.0;       // mean
  double speed_track_err = 0.0;   // mean
  double acceleration = 0.0;      // max
  double jerk = 0.0;              // max |.|
  double extra_distance = 0.0;    // mean
  double curvature = 0.0;         // max |.|
  double lane_changes = 0.0;      // sum
  double centripetal_acc = 0.0;   // max |.|
};

enum class Aggregation { kMean, kMax, kSum };

struct MetricField {
  std::string_view name;
  std::string_view label;
  Aggregation aggregation;
  double EpisodeMetrics::*member;
};

// Driving metrics in table order, followed by the mean step reward.
const std::array<MetricField, 8>& metric_fields();

EpisodeMetrics aggregate_metrics(const EpisodeLog& log);

struct ComparisonRow {
  std::string measure;
  std::string aggregation;
  double mean_a = 0.0, stderr_a = 0.0;
  double mean_b = 0.0, stderr_b = 0.0;
  std::string key;  // field name
};

struct Comparison {
  std::string planner_a;
  std::string planner_b;
  std::size_t episodes = 0;
  std::vector<ComparisonRow> rows;

  std::string to_text() const;
  std::string to_csv() const;
};

struct MeanStderr {
  double mean = 0.0;
  double stderr = 0.0;
};
MeanStderr mean_stderr(const std::vector<double>& samples);

// Throws LengthMismatch unless both lists hold the same number of episodes.
Comparison compare_planners(const std::vector<EpisodeMetrics>& a,
                            const std::vector<EpisodeMetrics>& b,
                            std::string planner_a = "exhaustive",
                            std::string planner_b = "rl");

std::string_view aggregation_name(Aggregation a);

}  // namespace trajrl::cost

#endif  // TRAJRL_METRICS_H_
