#include "trajrl/lattice.h"

#include <algorithm>
#include <cmath>

#include "trajrl/errors.h"

namespace trajrl {

void LatticeConfig::validate() const {
  if (lanes < 1) throw Error("lanes must be >= 1");
  if (sensor_layers < 1) throw Error("sensor_layers must be >= 1");
  if (plan_layers < 1 || plan_layers > sensor_layers)
    throw Error("plan_layers must be in [1, sensor_layers]");
  if (!(v_max > 0)) throw Error("v_max must be > 0");
  if (dn_max < 1) throw Error("dn_max must be >= 1");
  if (!(dv_max > 0)) throw Error("dv_max must be > 0");
  if (!(layer_spacing > 0) || !(lane_width > 0))
    throw Error("layer_spacing and lane_width must be > 0");
  if (!(halt_speed > 0)) throw Error("halt_speed must be > 0");
}

int lane_of(double n, int lanes) {
  const int lane = static_cast<int>(std::floor(n + 0.5 * lanes));
  return std::clamp(lane, 0, lanes - 1);
}

double lane_center(int lane, int lanes) { return lane + 0.5 - 0.5 * lanes; }

double start_offset(int lanes) { return lane_center(lanes / 2, lanes); }

double road_half_width(int lanes) { return 0.5 * lanes; }

std::vector<double> flatten(std::span<const LatticePoint> points) {
  std::vector<double> out(2 * points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    out[j] = points[j].n;
    out[points.size() + j] = points[j].v;
  }
  return out;
}

Reach reach_of(const LatticePoint& start, std::span<const LatticePoint> points,
               double halt_speed) {
  Reach r;
  double prev_v = start.v;
  for (const auto& p : points) {
    if (prev_v < halt_speed && p.v < halt_speed) {
      r.halted = true;
      return r;
    }
    ++r.layers;
    if (p.v < halt_speed) {
      r.halted = true;
      return r;
    }
    prev_v = p.v;
  }
  return r;
}

LatticePoint snap_to_lattice(const LatticePoint& p, int lanes,
                             std::span<const double> speed_levels) {
  LatticePoint out{lane_center(lane_of(p.n, lanes), lanes), p.v};
  double best = INFINITY;
  for (double level : speed_levels) {
    const double d = std::abs(level - p.v);
    if (d < best) {
      best = d;
      out.v = level;
    }
  }
  return out;
}

std::vector<double> integer_speed_levels(double v_max) {
  std::vector<double> levels;
  for (int v = 0; v <= static_cast<int>(std::floor(v_max)); ++v)
    levels.push_back(v);
  return levels;
}

}  // namespace trajrl
