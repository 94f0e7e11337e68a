#include "trajrl/safety.h"

#include <algorithm>
#include <cmath>

#include "trajrl/errors.h"

namespace trajrl::safety {

namespace {

constexpr double kSlack = 1e-9;

bool lexicographically_less(std::span<const LatticePoint> a,
                            std::span<const LatticePoint> b) {
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j].n != b[j].n) return a[j].n < b[j].n;
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j].v != b[j].v) return a[j].v < b[j].v;
  return false;
}

double squared_distance(std::span<const double> a, std::span<const LatticePoint> u) {
  const std::size_t h = u.size();
  double d = 0.0;
  for (std::size_t j = 0; j < h; ++j) {
    const double dn = a[j] - u[j].n;
    const double dv = a[h + j] - u[j].v;
    d += dn * dn + dv * dv;
  }
  return d;
}

bool within_motion_bounds(const LatticePoint& start, std::span<const LatticePoint> pts,
                          const LatticeConfig& lattice) {
  LatticePoint prev = start;
  for (const auto& p : pts) {
    if (std::abs(lane_of(p.n, lattice.lanes) - lane_of(prev.n, lattice.lanes)) >
        lattice.dn_max)
      return false;
    if (std::abs(p.v - prev.v) > lattice.dv_max + kSlack) return false;
    if (p.v < 0 || p.v > lattice.v_max + kSlack) return false;
    prev = p;
  }
  return true;
}

// Coordinatewise nearest lattice trajectory, or false when any coordinate is
// equidistant between two lattice values (the exact argmin may then differ).
bool round_to_lattice(const Trajectory& a, const LatticeConfig& lattice,
                      std::span<const double> levels, std::vector<LatticePoint>& out) {
  out.resize(a.points.size());
  for (std::size_t j = 0; j < a.points.size(); ++j) {
    const double n = a.points[j].n;
    const double center = lane_center(lane_of(n, lattice.lanes), lattice.lanes);
    if (std::abs(std::abs(n - center) - 0.5) < kSlack) return false;
    out[j].n = center;
    double best = INFINITY, second = INFINITY;
    for (double level : levels) {
      const double d = std::abs(level - a.points[j].v);
      if (d < best) {
        second = best;
        best = d;
        out[j].v = level;
      } else if (d < second) {
        second = d;
      }
    }
    if (second - best < kSlack) return false;
  }
  return true;
}

bool on_lattice(const LatticePoint& p, const LatticeConfig& lattice,
                std::span<const double> levels) {
  if (p.n != lane_center(lane_of(p.n, lattice.lanes), lattice.lanes)) return false;
  return std::find(levels.begin(), levels.end(), p.v) != levels.end();
}

double centripetal_at(std::span<const LatticePoint> seq, int i, const Scene& scene,
                      const LatticeConfig& lattice, const SafetyConfig& safety) {
  const auto terms =
      cost::layer_terms(seq[0], seq.subspan(1), i, scene, lattice, safety.cost_options);
  return std::abs(terms[static_cast<int>(cost::Term::kCentripetal)]);
}

}  // namespace

SceneChecker::SceneChecker(const Scene& scene, const LatticeConfig& lattice,
                           const SafetyConfig& safety)
    : scene_(scene), lattice_(lattice), safety_(safety), levels_(safety.levels(lattice)) {}

// seq = start followed by the driven points; the last one is still moving.
// Looks for lattice points on the following rows that bring the vehicle to
// rest without violating any bound. Results are cached once the last three
// points are lattice states, since nothing else influences the answer.
bool SceneChecker::can_stop(std::vector<LatticePoint>& seq) {
  const int k = static_cast<int>(seq.size());  // index of the next point
  const int row = k - 1;
  if (row >= scene_.layers) return false;

  std::uint64_t key = 0;
  const bool cacheable = k >= 3 && on_lattice(seq[k - 1], lattice_, levels_) &&
                         on_lattice(seq[k - 2], lattice_, levels_) &&
                         on_lattice(seq[k - 3], lattice_, levels_);
  if (cacheable) {
    const auto lanes = static_cast<std::uint64_t>(lattice_.lanes);
    const auto level = static_cast<std::uint64_t>(
        std::find(levels_.begin(), levels_.end(), seq[k - 1].v) - levels_.begin());
    key = static_cast<std::uint64_t>(row);
    for (int back = 3; back >= 1; --back)
      key = key * lanes + static_cast<std::uint64_t>(lane_of(seq[k - back].n, lattice_.lanes));
    key = key * levels_.size() + level;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }

  const LatticePoint last = seq.back();
  const int lane = lane_of(last.n, lattice_.lanes);
  bool found = false;
  for (int next = std::max(0, lane - lattice_.dn_max);
       !found && next <= std::min(lattice_.lanes - 1, lane + lattice_.dn_max); ++next) {
    if (scene_.occupied(row, next)) continue;
    for (double v : levels_) {
      if (std::abs(v - last.v) > lattice_.dv_max + kSlack) continue;
      seq.push_back({lane_center(next, lattice_.lanes), v});
      // The previous point just became interior, so its term is final.
      const bool bend_ok =
          k - 1 < 1 || centripetal_at(seq, k - 1, scene_, lattice_, safety_) <=
                           safety_.c_max + kSlack;
      if (bend_ok) found = v < lattice_.halt_speed || can_stop(seq);
      seq.pop_back();
      if (found) break;
    }
  }
  if (cacheable) memo_[key] = found;
  return found;
}

bool SceneChecker::safe(const LatticePoint& start, std::span<const LatticePoint> points,
                        double* worst_centripetal) {
  const Reach reach = reach_of(start, points, lattice_.halt_speed);
  std::vector<LatticePoint> seq{start};
  for (int j = 0; j < reach.layers; ++j) {
    const LatticePoint& p = points[static_cast<std::size_t>(j)];
    if (j >= scene_.layers || scene_.occupied(j, lane_of(p.n, lattice_.lanes))) return false;
    seq.push_back(p);
  }
  // Layers 1..reached-1 are interior; the last reached layer's term is fixed
  // by whatever follows it (zero when the vehicle stops there).
  double worst = 0.0;
  for (int i = 1; i + 1 < static_cast<int>(seq.size()); ++i)
    worst = std::max(worst, centripetal_at(seq, i, scene_, lattice_, safety_));
  if (worst_centripetal) *worst_centripetal = worst;
  if (worst > safety_.c_max + kSlack) return false;
  if (reach.halted) return true;
  return can_stop(seq);
}

bool SceneChecker::admissible(const LatticePoint& start, std::span<const LatticePoint> points) {
  for (const auto& p : points)
    if (p.n < -road_half_width(lattice_.lanes) || p.n > road_half_width(lattice_.lanes))
      return false;
  return within_motion_bounds(start, points, lattice_) && safe(start, points);
}

namespace {

class Enumerator {
 public:
  Enumerator(const Scene& scene, const LatticeConfig& lattice,
             const SafetyConfig& safety, FeasibleSet& out)
      : scene_(scene),
        lattice_(lattice),
        safety_(safety),
        levels_(safety.levels(lattice)),
        out_(out),
        checker_(scene, lattice, safety),
        path_(static_cast<std::size_t>(lattice.plan_layers)) {}

  void run() { expand(0, 0, false); }

 private:
  // Fills layer j+1 (path_[j]); `reached` counts driven layers so far.
  void expand(int j, int reached, bool halted) {
    const int h = lattice_.plan_layers;
    if (j == h) {
      if (checker_.safe(out_.start, path_)) out_.candidates.push_back(path_);
      return;
    }
    const LatticePoint& prev = j == 0 ? out_.start : path_[j - 1];
    const int prev_lane = lane_of(prev.n, lattice_.lanes);
    for (int lane = std::max(0, prev_lane - lattice_.dn_max);
         lane <= std::min(lattice_.lanes - 1, prev_lane + lattice_.dn_max); ++lane) {
      for (double v : levels_) {
        if (std::abs(v - prev.v) > lattice_.dv_max + kSlack) continue;
        LatticePoint p{lane_center(lane, lattice_.lanes), v};
        bool now_reached = false;
        bool now_halted = halted;
        if (!halted) {
          if (prev.v < lattice_.halt_speed && v < lattice_.halt_speed) {
            now_halted = true;
          } else {
            now_reached = true;
            if (v < lattice_.halt_speed) now_halted = true;
          }
        }
        if (now_reached && scene_.occupied(j, lane)) continue;
        path_[j] = p;
        if (now_reached && j >= 1 && !centripetal_ok(j)) continue;
        expand(j + 1, reached + (now_reached ? 1 : 0), now_halted);
      }
    }
  }

  // Centripetal term at layer j (1-based), final once layer j+1 is driven.
  bool centripetal_ok(int j) {
    std::span<const LatticePoint> prefix(path_.data(), static_cast<std::size_t>(j + 1));
    const auto terms =
        cost::layer_terms(out_.start, prefix, j, scene_, lattice_, safety_.cost_options);
    return std::abs(terms[static_cast<int>(cost::Term::kCentripetal)]) <=
           safety_.c_max + kSlack;
  }

  const Scene& scene_;
  const LatticeConfig& lattice_;
  const SafetyConfig& safety_;
  std::vector<double> levels_;
  FeasibleSet& out_;
  SceneChecker checker_;
  std::vector<LatticePoint> path_;
};

}  // namespace

void SafetyConfig::validate() const {
  if (!(tau > 0)) throw Error("tau must be > 0");
  if (!(c_max > 0)) throw Error("c_max must be > 0");
  for (double v : speed_levels)
    if (v < 0) throw Error("speed levels must be nonnegative");
}

std::vector<double> SafetyConfig::levels(const LatticeConfig& lattice) const {
  std::vector<double> out =
      speed_levels.empty() ? integer_speed_levels(lattice.v_max) : speed_levels;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  std::erase_if(out, [&](double v) { return v > lattice.v_max + kSlack; });
  return out;
}

FeasibleSet enumerate_free_set(const Scene& scene, const LatticeConfig& lattice,
                               const SafetyConfig& safety) {
  FeasibleSet set;
  set.start = snap_to_lattice({scene.n0, scene.v0}, lattice.lanes, safety.levels(lattice));
  Enumerator(scene, lattice, safety, set).run();
  return set;
}

bool is_admissible(const LatticePoint& start, std::span<const LatticePoint> points,
                   const Scene& scene, const LatticeConfig& lattice,
                   const SafetyConfig& safety) {
  return SceneChecker(scene, lattice, safety).admissible(start, points);
}

bool is_safe(const Trajectory& trajectory, const Scene& scene,
             const LatticeConfig& lattice, const SafetyConfig& safety) {
  return SceneChecker(scene, lattice, safety).safe(trajectory.start, trajectory.points);
}

double max_centripetal(const Trajectory& trajectory, const Scene& scene,
                       const LatticeConfig& lattice, const SafetyConfig& safety) {
  double worst = 0.0;
  SceneChecker(scene, lattice, safety).safe(trajectory.start, trajectory.points, &worst);
  return worst;
}

std::size_t project(std::span<const double> a, const FeasibleSet& set) {
  if (set.empty()) throw EmptyFeasibleSet();
  std::size_t best = 0;
  double best_d = squared_distance(a, set.candidates[0]);
  for (std::size_t k = 1; k < set.size(); ++k) {
    const double d = squared_distance(a, set.candidates[k]);
    if (d < best_d ||
        (d == best_d && lexicographically_less(set.candidates[k], set.candidates[best]))) {
      best = k;
      best_d = d;
    }
  }
  return best;
}

Constrained constrain(const Trajectory& proposal, const Scene& scene,
                      const LatticeConfig& lattice, const SafetyConfig& safety) {
  const std::vector<double> levels = safety.levels(lattice);
  const LatticePoint start = snap_to_lattice({scene.n0, scene.v0}, lattice.lanes, levels);

  // The coordinatewise rounding minimizes the distance over the whole product
  // lattice, so when it is itself feasible it is the projection.
  SceneChecker checker(scene, lattice, safety);
  std::vector<LatticePoint> best;
  const bool fast = round_to_lattice(proposal, lattice, levels, best) &&
                    checker.admissible(start, best);
  if (!fast) {
    const FeasibleSet set = enumerate_free_set(scene, lattice, safety);
    if (set.empty()) throw NoPathException();
    const std::vector<double> a = flatten(proposal.points);
    best = set.candidates[project(a, set)];
  }

  double deviation = 0.0;
  for (std::size_t j = 0; j < best.size(); ++j) {
    deviation = std::max(deviation, std::abs(best[j].n - proposal.points[j].n));
    deviation = std::max(deviation, std::abs(best[j].v - proposal.points[j].v));
  }
  Constrained out;
  out.deviation = deviation;
  if (deviation < safety.tau && checker.safe(proposal.start, proposal.points)) {
    out.trajectory = proposal;
    return out;
  }
  out.trajectory = Trajectory{start, std::move(best)};
  out.projected = true;
  return out;
}

Trajectory emergency_stop(const LatticePoint& from, int layers, double dv_max) {
  Trajectory t{from, {}};
  double v = from.v;
  for (int j = 0; j < layers; ++j) {
    v = std::max(v - dv_max, 0.0);
    t.points.push_back({from.n, v});
  }
  return t;
}

}  // namespace trajrl::safety
