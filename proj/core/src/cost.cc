#include "trajrl/cost.h"

#include <cmath>

#include "trajrl/errors.h"

namespace trajrl::cost {

std::string_view term_name(Term t) {
  switch (t) {
    case Term::kSpeedError: return "speed_error";
    case Term::kAcceleration: return "acceleration";
    case Term::kJerk: return "jerk";
    case Term::kExtraDistance: return "extra_distance";
    case Term::kCurvature: return "curvature";
    case Term::kLaneCrossing: return "lane_crossing";
    case Term::kCentripetal: return "centripetal";
  }
  return "?";
}

void CostWeights::validate() const {
  for (double w : as_array())
    if (!(w >= 0)) throw Error("cost weights must be nonnegative");
}

std::array<double, kNumTerms> CostWeights::as_array() const {
  return {speed_error, acceleration, jerk, extra_distance,
          curvature,   lane_crossing, centripetal};
}

CostWeights CostWeights::scaled(double factor) const {
  return {speed_error * factor,   acceleration * factor,  jerk * factor,
          extra_distance * factor, curvature * factor,    lane_crossing * factor,
          centripetal * factor};
}

LayerTerms TermTable::layer(int index) const {
  LayerTerms out{};
  for (int t = 0; t < kNumTerms; ++t) out[t] = values[t][index];
  return out;
}

namespace {

double acceleration_at(const LatticePoint& p, const LatticePoint& q,
                       const LatticeConfig& lattice) {
  const double lateral = (p.n - q.n) * lattice.lane_width;
  const double dist =
      std::sqrt(lattice.layer_spacing * lattice.layer_spacing + lateral * lateral);
  return (p.v - q.v) * (p.v - q.v) / (2.0 * dist);
}

}  // namespace

LayerTerms layer_terms(const LatticePoint& start,
                       std::span<const LatticePoint> points, int i,
                       const Scene& scene, const LatticeConfig& lattice,
                       const CostOptions& options) {
  const int h = static_cast<int>(points.size());
  // node(0) is the current state, node(i) layer i.
  auto node = [&](int k) -> const LatticePoint& {
    return k == 0 ? start : points[static_cast<std::size_t>(k - 1)];
  };
  const double spacing = lattice.layer_spacing;
  const double width = lattice.lane_width;
  const LatticePoint& p = node(i);
  const LatticePoint& q = node(i - 1);
  const double lateral = (p.n - q.n) * width;
  const double dist = std::sqrt(spacing * spacing + lateral * lateral);

  LayerTerms out{};
  auto at = [&](Term t) -> double& { return out[static_cast<int>(t)]; };
  if (i - 1 < scene.layers) {
    const double ref = scene.speed_limit(i - 1, lane_of(p.n, lattice.lanes));
    at(Term::kSpeedError) = (ref - p.v) * (ref - p.v);
  }
  at(Term::kAcceleration) = (p.v - q.v) * (p.v - q.v) / (2.0 * dist);
  at(Term::kExtraDistance) = dist - spacing;
  at(Term::kLaneCrossing) =
      lane_of(p.n, lattice.lanes) != lane_of(q.n, lattice.lanes) ? 1.0 : 0.0;
  if (i < h) {
    at(Term::kJerk) = acceleration_at(node(i + 1), p, lattice) - at(Term::kAcceleration);
    // Lateral offsets are scaled to the same length unit as the layer spacing.
    double second = 0.0;
    if (options.curvature == CurvatureForm::kSecondDifference) {
      second = node(i + 1).n - 2.0 * p.n + q.n;
    } else if (i >= 2) {
      second = node(i + 1).n - 2.0 * p.n + node(i - 2).n;
    }
    at(Term::kCurvature) = second * width / spacing;
  }
  const double k = at(Term::kCurvature);
  at(Term::kCentripetal) =
      options.centripetal == CentripetalForm::kAsWritten ? k * p.v : k * p.v * p.v;
  return out;
}

double weighted_cost(const LatticePoint& start,
                     std::span<const LatticePoint> points, const Scene& scene,
                     const CostWeights& weights, const LatticeConfig& lattice,
                     const CostOptions& options) {
  const auto w = weights.as_array();
  double f = 0.0;
  for (int i = 1; i <= static_cast<int>(points.size()); ++i) {
    const LayerTerms terms = layer_terms(start, points, i, scene, lattice, options);
    for (int t = 0; t < kNumTerms; ++t) f += w[t] * terms[t];
  }
  return f;
}

TermTable evaluate_terms(const Trajectory& trajectory, const Scene& scene,
                         const LatticeConfig& lattice,
                         const CostOptions& options) {
  const int h = static_cast<int>(trajectory.points.size());
  TermTable table;
  for (auto& v : table.values) v.assign(h, 0.0);
  for (int i = 1; i <= h; ++i) {
    const LayerTerms terms =
        layer_terms(trajectory.start, trajectory.points, i, scene, lattice, options);
    for (int t = 0; t < kNumTerms; ++t) table.values[t][i - 1] = terms[t];
  }
  return table;
}

std::vector<double> term(Term kind, const Trajectory& trajectory,
                         const Scene& scene, const LatticeConfig& lattice,
                         const CostOptions& options) {
  const std::size_t needed =
      (kind == Term::kJerk || kind == Term::kCurvature || kind == Term::kCentripetal)
          ? 2
          : 1;
  if (trajectory.points.size() < needed)
    throw DegenerateTrajectory(std::string(term_name(kind)) + " needs " +
                               std::to_string(needed + 1) + " layers");
  if (kind == Term::kAcceleration || kind == Term::kExtraDistance) {
    if (!(lattice.layer_spacing > 0))
      throw DegenerateTrajectory("layer distance must be positive");
  }
  return evaluate_terms(trajectory, scene, lattice, options)[kind];
}

CostReport summarize(const TermTable& table, const CostWeights& weights,
                     int first, int count) {
  const int end = count < 0 ? table.layers() : first + count;
  CostReport report;
  for (int t = 0; t < kNumTerms; ++t)
    for (int i = first; i < end; ++i) report.totals[t] += table.values[t][i];
  report.total = weighted_total(report, weights);
  return report;
}

CostReport trajectory_cost(const Trajectory& trajectory, const Scene& scene,
                           const CostWeights& weights,
                           const LatticeConfig& lattice,
                           const CostOptions& options) {
  if (trajectory.points.empty()) throw DegenerateTrajectory("empty trajectory");
  return summarize(evaluate_terms(trajectory, scene, lattice, options), weights);
}

double weighted_total(const CostReport& report, const CostWeights& weights) {
  const auto w = weights.as_array();
  double f = 0.0;
  for (int t = 0; t < kNumTerms; ++t) f += w[t] * report.totals[t];
  return f;
}

double step_reward(Outcome outcome, const CostReport& report,
                   const CostWeights& weights) {
  double r = kStepReward - weighted_total(report, weights);
  if (outcome == Outcome::kSuccess) r += kSuccessReward;
  if (outcome == Outcome::kFailure) r += kFailureReward;
  return r;
}

}  // namespace trajrl::cost
