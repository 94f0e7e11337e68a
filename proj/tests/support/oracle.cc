#include "oracle.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace oracle {

namespace {

constexpr double kEps = 1e-9;

bool occupied(const Scene& s, int row, int lane) {
  return s.occupancy[static_cast<std::size_t>(row * s.lanes + lane)] != 0;
}

double limit(const Scene& s, int row, int lane) {
  return s.speed_limits[static_cast<std::size_t>(row * s.lanes + lane)];
}

std::vector<double> flat(const Path& p) {
  std::vector<double> out;
  for (const auto& q : p) out.push_back(q.n);
  for (const auto& q : p) out.push_back(q.v);
  return out;
}

// Calls f for every tuple of `h` (lane, level) pairs.
template <typename F>
void for_each_tuple(int lanes, const std::vector<double>& levels, int h, F&& f) {
  const int per_layer = lanes * static_cast<int>(levels.size());
  long total = 1;
  for (int j = 0; j < h; ++j) total *= per_layer;
  Path path(static_cast<std::size_t>(h));
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int j = h - 1; j >= 0; --j) {
      const int digit = static_cast<int>(c % per_layer);
      c /= per_layer;
      path[static_cast<std::size_t>(j)] = {
          lane_center(digit / static_cast<int>(levels.size()), lanes),
          levels[static_cast<std::size_t>(digit % static_cast<int>(levels.size()))]};
    }
    f(path);
  }
}

}  // namespace

std::vector<double> speed_levels(const std::vector<double>& requested, double v_max) {
  std::set<double> s;
  if (requested.empty()) {
    for (double v = 0; v <= v_max + kEps; v += 1.0) s.insert(v);
  } else {
    for (double v : requested)
      if (v <= v_max + kEps) s.insert(v);
  }
  return {s.begin(), s.end()};
}

int lane_index(double n, int lanes) {
  // Lane k covers [k - W/2, k + 1 - W/2).
  int k = 0;
  while (k + 1 < lanes && n >= (k + 1) - 0.5 * lanes) ++k;
  return k;
}

double lane_center(int lane, int lanes) { return (lane + 0.5) - lanes / 2.0; }

double centripetal(double n_prev, double n, double n_next, double v,
                   const LatticeConfig& lattice, const trajrl::cost::CostOptions& options) {
  const double kappa = (n_next - 2 * n + n_prev) * lattice.lane_width / lattice.layer_spacing;
  return options.centripetal == trajrl::cost::CentripetalForm::kPhysical ? kappa * v * v
                                                                        : kappa * v;
}

Rules Rules::from(const LatticeConfig& lattice, const trajrl::safety::SafetyConfig& safety) {
  Rules r;
  r.lattice = lattice;
  r.levels = speed_levels(safety.speed_levels, lattice.v_max);
  r.c_max = safety.c_max;
  r.options = safety.cost_options;
  return r;
}

bool safe(const Scene& scene, const Rules& rules, const LatticePoint& start, const Path& path) {
  const LatticeConfig& l = rules.lattice;
  const double halt = l.halt_speed;
  // Driven prefix: a layer is entered unless both ends are below the halt speed.
  std::vector<LatticePoint> driven{start};
  bool stopped = false;
  for (const auto& p : path) {
    if (driven.back().v < halt && p.v < halt) {
      stopped = true;
      break;
    }
    driven.push_back(p);
    if (p.v < halt) {
      stopped = true;
      break;
    }
  }
  const int reached = static_cast<int>(driven.size()) - 1;
  for (int j = 1; j <= reached; ++j) {
    if (j - 1 >= scene.layers) return false;
    if (occupied(scene, j - 1, lane_index(driven[j].n, l.lanes))) return false;
  }
  for (int j = 1; j < reached; ++j)
    if (std::abs(centripetal(driven[j - 1].n, driven[j].n, driven[j + 1].n, driven[j].v, l,
                             rules.options)) > rules.c_max + kEps)
      return false;
  if (stopped) return true;

  // States (n before, n now, v now) that can stand at the current row.
  using State = std::tuple<double, double, double>;
  std::set<State> frontier{{driven[reached - 1].n, driven[reached].n, driven[reached].v}};
  for (int row = reached; row < scene.layers && !frontier.empty(); ++row) {
    std::set<State> next;
    for (const auto& [a, b, v] : frontier) {
      const int lane = lane_index(b, l.lanes);
      for (int c = 0; c < l.lanes; ++c) {
        if (std::abs(c - lane) > l.dn_max || occupied(scene, row, c)) continue;
        const double nc = lane_center(c, l.lanes);
        if (std::abs(centripetal(a, b, nc, v, l, rules.options)) > rules.c_max + kEps) continue;
        for (double w : rules.levels) {
          if (std::abs(w - v) > l.dv_max + kEps) continue;
          if (w < halt) return true;
          next.insert({b, nc, w});
        }
      }
    }
    frontier = std::move(next);
  }
  return false;
}

bool admissible(const Scene& scene, const Rules& rules, const LatticePoint& start,
                const Path& path) {
  const LatticeConfig& l = rules.lattice;
  LatticePoint prev = start;
  for (const auto& p : path) {
    if (std::abs(p.n) > 0.5 * l.lanes) return false;
    if (std::abs(lane_index(p.n, l.lanes) - lane_index(prev.n, l.lanes)) > l.dn_max) return false;
    if (std::abs(p.v - prev.v) > l.dv_max + kEps) return false;
    if (p.v < 0 || p.v > l.v_max + kEps) return false;
    prev = p;
  }
  return safe(scene, rules, start, path);
}

std::vector<Path> free_set(const Scene& scene, const Rules& rules, const LatticePoint& start,
                           const std::vector<double>& enumeration_levels) {
  std::vector<Path> out;
  for_each_tuple(rules.lattice.lanes, enumeration_levels, rules.lattice.plan_layers,
                 [&](const Path& p) {
                   if (admissible(scene, rules, start, p)) out.push_back(p);
                 });
  return out;
}

bool flat_less(const Path& a, const Path& b) { return flat(a) < flat(b); }

std::size_t project(const std::vector<double>& a, const std::vector<Path>& set) {
  std::size_t best = set.size();
  double best_d = 0;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const std::vector<double> u = flat(set[k]);
    double d = 0;
    for (std::size_t i = 0; i < u.size(); ++i) d += (a[i] - u[i]) * (a[i] - u[i]);
    if (best == set.size() || d < best_d || (d == best_d && u < flat(set[best]))) {
      best = k;
      best_d = d;
    }
  }
  return best;
}

std::array<double, trajrl::cost::kNumTerms> term_sums(const LatticePoint& start, const Path& path,
                                                      const Scene& scene,
                                                      const LatticeConfig& lattice,
                                                      const trajrl::cost::CostOptions& options) {
  const int h = static_cast<int>(path.size());
  std::vector<LatticePoint> x{start};
  x.insert(x.end(), path.begin(), path.end());
  const double L = lattice.layer_spacing;
  auto dist = [&](int i) {
    const double dn = (x[i].n - x[i - 1].n) * lattice.lane_width;
    return std::hypot(L, dn);
  };
  auto accel = [&](int i) {
    const double dv = x[i].v - x[i - 1].v;
    return dv * dv / (2 * dist(i));
  };
  std::array<double, trajrl::cost::kNumTerms> s{};
  for (int i = 1; i <= h; ++i) {
    if (i - 1 < scene.layers) {
      const double ref = limit(scene, i - 1, lane_index(x[i].n, lattice.lanes));
      s[0] += (ref - x[i].v) * (ref - x[i].v);
    }
    s[1] += accel(i);
    s[3] += dist(i) - L;
    s[5] += lane_index(x[i].n, lattice.lanes) != lane_index(x[i - 1].n, lattice.lanes);
    if (i < h) {
      s[2] += accel(i + 1) - accel(i);
      double second = 0;
      if (options.curvature == trajrl::cost::CurvatureForm::kSecondDifference)
        second = x[i + 1].n - 2 * x[i].n + x[i - 1].n;
      else if (i >= 2)
        second = x[i + 1].n - 2 * x[i].n + x[i - 2].n;
      const double kappa = second * lattice.lane_width / L;
      s[4] += kappa;
      s[6] += options.centripetal == trajrl::cost::CentripetalForm::kPhysical
                  ? kappa * x[i].v * x[i].v
                  : kappa * x[i].v;
    }
  }
  return s;
}

double weighted_cost(const LatticePoint& start, const Path& path, const Scene& scene,
                     const LatticeConfig& lattice, const trajrl::cost::CostWeights& weights,
                     const trajrl::cost::CostOptions& options) {
  const auto s = term_sums(start, path, scene, lattice, options);
  return weights.speed_error * s[0] + weights.acceleration * s[1] + weights.jerk * s[2] +
         weights.extra_distance * s[3] + weights.curvature * s[4] +
         weights.lane_crossing * s[5] + weights.centripetal * s[6];
}

std::optional<SearchResult> search(const Scene& scene, const Rules& rules,
                                   const LatticePoint& start,
                                   const std::vector<double>& enumeration_levels,
                                   const trajrl::cost::CostWeights& weights) {
  const std::vector<Path> set = free_set(scene, rules, start, enumeration_levels);
  if (set.empty()) return std::nullopt;
  std::vector<double> costs;
  for (const auto& p : set)
    costs.push_back(weighted_cost(start, p, scene, rules.lattice, weights, rules.options));
  SearchResult r;
  r.feasible = set.size();
  r.best_cost = *std::min_element(costs.begin(), costs.end());
  for (std::size_t k = 0; k < set.size(); ++k)
    if (costs[k] <= r.best_cost + 1e-9) r.near_best.push_back(set[k]);
  std::sort(r.near_best.begin(), r.near_best.end(), flat_less);
  return r;
}

std::vector<double> gae_direct(const std::vector<double>& rewards,
                               const std::vector<double>& values,
                               const std::vector<std::uint8_t>& dones, double gamma,
                               double lambda) {
  const std::size_t n = rewards.size();
  std::vector<double> delta(n);
  for (std::size_t k = 0; k < n; ++k)
    delta[k] = rewards[k] + (dones[k] ? 0.0 : gamma * values[k + 1]) - values[k];
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += weight * delta[k];
      if (dones[k]) break;
      weight *= gamma * lambda;
    }
  }
  return adv;
}

SmallCase random_small_case(std::mt19937_64& rng) {
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  SmallCase c;
  LatticeConfig& l = c.lattice;
  l.lanes = uniform_int(2, 4);
  l.plan_layers = uniform_int(1, 3);
  l.sensor_layers = l.plan_layers + uniform_int(0, 3);
  l.v_max = 4.0;
  l.dn_max = uniform_int(1, 2);
  l.dv_max = uniform_int(1, 2);
  l.layer_spacing = chance(0.5) ? 1.0 : 2.0;
  l.lane_width = chance(0.5) ? 1.0 : 0.5;

  std::vector<double> pool{1, 2, 3, 4};
  std::shuffle(pool.begin(), pool.end(), rng);
  const int count = uniform_int(1, 3);
  std::vector<double> levels(pool.begin(), pool.begin() + count);
  if (chance(0.85)) levels.push_back(0.0);
  std::sort(levels.begin(), levels.end());
  c.safety.speed_levels = levels;
  c.safety.c_max = static_cast<double>(uniform_int(1, 3));
  if (chance(0.2)) c.safety.cost_options.centripetal = trajrl::cost::CentripetalForm::kPhysical;

  const double p = std::uniform_real_distribution<double>(0.1, 0.5)(rng);
  Scene& s = c.scene;
  s.lanes = l.lanes;
  s.layers = l.sensor_layers;
  s.occupancy.resize(static_cast<std::size_t>(s.lanes * s.layers));
  s.speed_limits.resize(s.occupancy.size());
  for (auto& o : s.occupancy) o = chance(p) ? 1 : 0;
  for (auto& v : s.speed_limits) v = uniform_int(1, 4);
  const int lane = uniform_int(0, l.lanes - 1);
  c.start = {lane_center(lane, l.lanes),
             levels[static_cast<std::size_t>(uniform_int(0, static_cast<int>(levels.size()) - 1))]};
  s.n0 = c.start.n;
  s.v0 = c.start.v;
  return c;
}

}  // namespace oracle
