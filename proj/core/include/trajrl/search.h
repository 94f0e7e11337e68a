#ifndef TRAJRL_SEARCH_H_
#define TRAJRL_SEARCH_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "trajrl/cost.h"
#include "trajrl/lattice.h"
#include "trajrl/safety.h"
#include "trajrl/scene.h"

namespace trajrl::search {

struct SearchConfig {
  std::vector<double> speed_levels;  // empty: 0, 1, ..., v_max
  int dn_max = 1;                    // lateral moves -dn_max..dn_max lanes
  int horizon = 3;
  bool allow_halt = true;            // false: drop levels below the halt speed

  void validate() const;
  static SearchConfig for_lattice(const LatticeConfig& lattice);
};

struct Plan {
  Trajectory trajectory;
  double cost = 0.0;
  std::size_t candidates = 0;  // size of the feasible set searched
};

// Minimum weighted trajectory cost over every feasible lattice trajectory,
// ties to the lexicographically smallest candidate. Throws NoPathException if
// nothing is feasible.
Plan plan_exhaustive(const Scene& scene, const cost::CostWeights& weights,
                     const LatticeConfig& lattice, const SearchConfig& search,
                     const safety::SafetyConfig& safety);

struct Latency {
  double mean_s = 0.0;
  double stderr_s = 0.0;
  std::size_t queries = 0;
};

using Planner = std::function<Trajectory(const Scene&)>;

// Wall-clock seconds per planner query over the scenes (cycled until at least
// min_queries have run) after `warmup` untimed queries. Queries that end in
// NoPathException are timed like any other.
Latency query_latency(const Planner& planner, std::span<const Scene> scenes,
                      std::size_t min_queries = 100, std::size_t warmup = 5);

}  // namespace trajrl::search

#endif  // TRAJRL_SEARCH_H_
