#ifndef TRAJRL_SAFETY_H_
#define TRAJRL_SAFETY_H_

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "trajrl/cost.h"
#include "trajrl/lattice.h"
#include "trajrl/scene.h"

namespace trajrl::safety {

struct SafetyConfig {
  double tau = 0.5;    // lattice units
  double c_max = 2.0;  // bound on |centripetal| per layer
  // Speed quantization for candidates; empty means 0, 1, ..., v_max.
  std::vector<double> speed_levels;
  cost::CostOptions cost_options;

  void validate() const;
  std::vector<double> levels(const LatticeConfig& lattice) const;
};

// C^free: every lattice trajectory over the plan horizon that respects the
// per-layer motion bounds, never enters an occupied cell, keeps
// |centripetal| <= c_max, and can still be continued to a stop inside the
// sensor window.
struct FeasibleSet {
  LatticePoint start;  // lattice state the candidates depart from
  std::vector<std::vector<LatticePoint>> candidates;

  bool empty() const { return candidates.empty(); }
  std::size_t size() const { return candidates.size(); }
};

FeasibleSet enumerate_free_set(const Scene& scene, const LatticeConfig& lattice,
                               const SafetyConfig& safety);

// Safety checks against one scene. Continuation results are cached, so reuse
// one checker for many trajectories on the same scene.
class SceneChecker {
 public:
  SceneChecker(const Scene& scene, const LatticeConfig& lattice, const SafetyConfig& safety);

  // Reached cells free, |centripetal| within bound on the reached part and,
  // unless the vehicle stops inside the plan, some lattice continuation that
  // comes to rest inside the window under the same rules. Motion bounds of
  // the trajectory itself are not checked. worst_centripetal receives the
  // largest |centripetal| over the reached layers whose term is final.
  bool safe(const LatticePoint& start, std::span<const LatticePoint> points,
            double* worst_centripetal = nullptr);
  // C^free membership of a lattice trajectory departing from `start`.
  bool admissible(const LatticePoint& start, std::span<const LatticePoint> points);

 private:
  bool can_stop(std::vector<LatticePoint>& seq);

  const Scene& scene_;
  const LatticeConfig& lattice_;
  const SafetyConfig& safety_;
  std::vector<double> levels_;
  std::unordered_map<std::uint64_t, bool> memo_;
};

// Membership test for C^free of a lattice trajectory departing from the
// lattice state `start`: motion bounds plus the is_safe checks.
bool is_admissible(const LatticePoint& start, std::span<const LatticePoint> points,
                   const Scene& scene, const LatticeConfig& lattice,
                   const SafetyConfig& safety);

// SceneChecker::safe for an arbitrary (possibly continuous) trajectory.
bool is_safe(const Trajectory& trajectory, const Scene& scene,
             const LatticeConfig& lattice, const SafetyConfig& safety);

// Largest |centripetal| over the reached layers whose term does not depend
// on what follows the plan.
double max_centripetal(const Trajectory& trajectory, const Scene& scene,
                       const LatticeConfig& lattice, const SafetyConfig& safety);

// Index of argmin_u ||a - u||^2 over the set, ties to the lexicographically
// smallest flattened candidate. `a` is (n_1..n_H, v_1..v_H).
std::size_t project(std::span<const double> a, const FeasibleSet& set);

struct Constrained {
  Trajectory trajectory;
  bool projected = false;   // true when u* replaced the proposal
  double deviation = 0.0;   // max |u* - a|
};

// Returns the proposal when it lies within tau of its projection (and is
// itself safe), otherwise the projection. Throws NoPathException when the free
// set is empty.
Constrained constrain(const Trajectory& proposal, const Scene& scene,
                      const LatticeConfig& lattice, const SafetyConfig& safety);

// Straight maximum-deceleration trajectory over `layers` layers.
Trajectory emergency_stop(const LatticePoint& from, int layers, double dv_max);

}  // namespace trajrl::safety

#endif  // TRAJRL_SAFETY_H_
