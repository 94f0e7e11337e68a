#ifndef TRAJRL_LATTICE_H_
#define TRAJRL_LATTICE_H_

#include <span>
#include <vector>

namespace trajrl {

// Dimensions and motion limits of the planning lattice. Lateral positions are
// measured in lane units from the road center, speeds in cells per step.
struct LatticeConfig {
  int lanes = 3;           // W
  int sensor_layers = 10;  // H_s
  int plan_layers = 3;     // H_p
  double v_max = 5.0;
  int dn_max = 1;
  double dv_max = 1.0;
  // Geometry used by the distance-based cost terms.
  double layer_spacing = 1.0;
  double lane_width = 1.0;
  // Below this speed the vehicle is at rest and stops advancing.
  double halt_speed = 0.5;

  void validate() const;
};

struct LatticePoint {
  double n = 0.0;
  double v = 0.0;

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

// A planned behavioral trajectory: the current state followed by one point per
// layer ahead.
struct Trajectory {
  LatticePoint start;
  std::vector<LatticePoint> points;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Lane index containing lateral offset n, clamped to the road.
int lane_of(double n, int lanes);
double lane_center(int lane, int lanes);
// Vehicles start in the center of lane floor(W/2).
double start_offset(int lanes);
double road_half_width(int lanes);

// (n_1..n_H, v_1..v_H)
std::vector<double> flatten(std::span<const LatticePoint> points);

struct Reach {
  int layers = 0;       // leading layers the vehicle actually enters
  bool halted = false;  // comes to rest at the last reached layer
};

// The vehicle moves from layer j-1 to j when either endpoint speed is at least
// halt_speed, and stops at the first layer reached below halt_speed.
Reach reach_of(const LatticePoint& start, std::span<const LatticePoint> points,
               double halt_speed);

// Nearest lattice state: lane center and nearest speed level.
LatticePoint snap_to_lattice(const LatticePoint& p, int lanes,
                             std::span<const double> speed_levels);

std::vector<double> integer_speed_levels(double v_max);

}  // namespace trajrl

#endif  // TRAJRL_LATTICE_H_
