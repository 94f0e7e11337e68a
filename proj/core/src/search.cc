#include "trajrl/search.h"

#include "trajrl/errors.h"

namespace trajrl::search {

void SearchConfig::validate() const {
  if (dn_max < 0) throw Error("search dn_max must be >= 0");
  if (horizon < 1) throw Error("search horizon must be >= 1");
  for (double v : speed_levels)
    if (v < 0) throw Error("search speed levels must be nonnegative");
}

SearchConfig SearchConfig::for_lattice(const LatticeConfig& lattice) {
  SearchConfig s;
  s.dn_max = lattice.dn_max;
  s.horizon = lattice.plan_layers;
  return s;
}

Plan plan_exhaustive(const Scene& scene, const cost::CostWeights& weights,
                     const LatticeConfig& lattice, const SearchConfig& search,
                     const safety::SafetyConfig& safety) {
  search.validate();
  LatticeConfig grid = lattice;
  grid.plan_layers = search.horizon;
  grid.dn_max = search.dn_max;
  if (scene.layers < grid.plan_layers) throw Error("scene is shallower than the horizon");
  // Candidates use the search levels; feasibility (including how the vehicle
  // may stop afterwards) follows the safety rules.
  safety::SafetyConfig enumerated = safety;
  if (!search.speed_levels.empty()) enumerated.speed_levels = search.speed_levels;
  std::vector<double> levels = enumerated.levels(grid);
  if (!search.allow_halt)
    std::erase_if(levels, [&](double v) { return v < grid.halt_speed; });
  if (levels.empty()) throw Error("no search speed levels within v_max");
  const LatticePoint start =
      snap_to_lattice({scene.n0, scene.v0}, grid.lanes, safety.levels(grid));
  safety::SceneChecker checker(scene, grid, safety);

  // Plain enumeration of every (lateral move, speed level) sequence; each
  // candidate is checked and costed on its own.
  const int h = grid.plan_layers;
  const int moves = 2 * grid.dn_max + 1;
  const int choices = moves * static_cast<int>(levels.size());
  std::vector<int> digit(static_cast<std::size_t>(h), 0);
  std::vector<LatticePoint> path(static_cast<std::size_t>(h));
  std::vector<LatticePoint> best;
  double best_cost = 0.0;
  std::size_t feasible = 0;
  while (true) {
    double n = start.n;
    for (int j = 0; j < h; ++j) {
      const int d = digit[static_cast<std::size_t>(j)];
      n += (d / static_cast<int>(levels.size()) - grid.dn_max) * 1.0;
      path[static_cast<std::size_t>(j)] = {n, levels[static_cast<std::size_t>(d) % levels.size()]};
    }
    if (checker.admissible(start, path)) {
      ++feasible;
      const double c = cost::weighted_cost(start, path, scene, weights, grid, safety.cost_options);
      if (best.empty() || c < best_cost || (c == best_cost && flatten(path) < flatten(best))) {
        best = path;
        best_cost = c;
      }
    }
    int j = h - 1;
    while (j >= 0 && ++digit[static_cast<std::size_t>(j)] == choices) digit[static_cast<std::size_t>(j--)] = 0;
    if (j < 0) break;
  }
  if (best.empty()) throw NoPathException();
  return Plan{Trajectory{start, best}, best_cost, feasible};
}

}  // namespace trajrl::search
