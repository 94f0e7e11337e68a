#include "trajrl/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "trajrl/errors.h"

namespace trajrl::cost {

const std::array<MetricField, 8>& metric_fields() {
  static const std::array<MetricField, 8> fields = {{
      {"speed_track_err", "Speed Track Err", Aggregation::kMean, &EpisodeMetrics::speed_track_err},
      {"acceleration", "Acceleration", Aggregation::kMax, &EpisodeMetrics::acceleration},
      {"jerk", "Jerk", Aggregation::kMax, &EpisodeMetrics::jerk},
      {"extra_distance", "Excess Distance", Aggregation::kMean, &EpisodeMetrics::extra_distance},
      {"curvature", "Curvature", Aggregation::kMax, &EpisodeMetrics::curvature},
      {"lane_changes", "Lane Changes", Aggregation::kSum, &EpisodeMetrics::lane_changes},
      {"centripetal_acc", "Centrip. Acc.", Aggregation::kMax, &EpisodeMetrics::centripetal_acc},
      {"step_reward", "Step Reward", Aggregation::kMean, &EpisodeMetrics::step_reward},
  }};
  return fields;
}

std::string_view aggregation_name(Aggregation a) {
  switch (a) {
    case Aggregation::kMean: return "Mean";
    case Aggregation::kMax: return "Max";
    case Aggregation::kSum: return "Sum";
  }
  return "?";
}

EpisodeMetrics aggregate_metrics(const EpisodeLog& log) {
  EpisodeMetrics m;
  if (!log.rewards.empty()) {
    double sum = 0.0;
    for (double r : log.rewards) sum += r;
    m.step_reward = sum / static_cast<double>(log.rewards.size());
  }
  if (log.layers.empty()) return m;

  auto col = [](const LayerTerms& l, Term t) { return l[static_cast<int>(t)]; };
  double speed = 0.0, extra = 0.0;
  for (const auto& l : log.layers) {
    speed += col(l, Term::kSpeedError);
    extra += col(l, Term::kExtraDistance);
    m.acceleration = std::max(m.acceleration, col(l, Term::kAcceleration));
    m.jerk = std::max(m.jerk, std::abs(col(l, Term::kJerk)));
    m.curvature = std::max(m.curvature, std::abs(col(l, Term::kCurvature)));
    m.centripetal_acc = std::max(m.centripetal_acc, std::abs(col(l, Term::kCentripetal)));
    m.lane_changes += col(l, Term::kLaneCrossing);
  }
  const double n = static_cast<double>(log.layers.size());
  m.speed_track_err = speed / n;
  m.extra_distance = extra / n;
  return m;
}

MeanStderr mean_stderr(const std::vector<double>& samples) {
  MeanStderr out;
  if (samples.empty()) return out;
  const double n = static_cast<double>(samples.size());
  for (double s : samples) out.mean += s;
  out.mean /= n;
  if (samples.size() < 2) return out;
  double ss = 0.0;
  for (double s : samples) ss += (s - out.mean) * (s - out.mean);
  out.stderr = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

Comparison compare_planners(const std::vector<EpisodeMetrics>& a,
                            const std::vector<EpisodeMetrics>& b,
                            std::string planner_a, std::string planner_b) {
  if (a.size() != b.size())
    throw LengthMismatch("planner comparison needs matched episode counts");
  Comparison cmp;
  cmp.planner_a = std::move(planner_a);
  cmp.planner_b = std::move(planner_b);
  cmp.episodes = a.size();
  for (const auto& field : metric_fields()) {
    std::vector<double> xa, xb;
    for (const auto& m : a) xa.push_back(m.*field.member);
    for (const auto& m : b) xb.push_back(m.*field.member);
    const auto sa = mean_stderr(xa);
    const auto sb = mean_stderr(xb);
    cmp.rows.push_back({std::string(field.label),
                        std::string(aggregation_name(field.aggregation)), sa.mean,
                        sa.stderr, sb.mean, sb.stderr, std::string(field.name)});
  }
  return cmp;
}

std::string Comparison::to_text() const {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "Driving metrics over %zu episodes\n", episodes);
  out << buf;
  std::snprintf(buf, sizeof(buf), "%-16s %-6s %22s %22s\n", "Measure", "Agg",
                planner_a.c_str(), planner_b.c_str());
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-16s %-6s %12.3f +- %7.3f %12.3f +- %7.3f\n",
                  r.measure.c_str(), r.aggregation.c_str(), r.mean_a, r.stderr_a,
                  r.mean_b, r.stderr_b);
    out << buf;
  }
  return out.str();
}

std::string Comparison::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "measure,aggregation," << planner_a << "_mean," << planner_a << "_stderr,"
      << planner_b << "_mean," << planner_b << "_stderr\n";
  for (const auto& r : rows)
    out << r.measure << ',' << r.aggregation << ',' << r.mean_a << ',' << r.stderr_a
        << ',' << r.mean_b << ',' << r.stderr_b << '\n';
  return out.str();
}

}  // namespace trajrl::cost
