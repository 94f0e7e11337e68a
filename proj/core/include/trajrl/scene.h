#ifndef TRAJRL_SCENE_H_
#define TRAJRL_SCENE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace trajrl {

// The observation window ahead of the vehicle. Row 0 is the first layer in
// front of the vehicle; the vehicle itself sits on layer 0, outside the grid.
struct Scene {
  int lanes = 0;
  int layers = 0;
  std::vector<std::uint8_t> occupancy;  // layers x lanes, 1 = occupied
  std::vector<double> speed_limits;     // layers x lanes, cells/step
  double n0 = 0.0;
  double v0 = 0.0;

  Scene() = default;
  Scene(int lanes, int layers, double fill_speed = 0.0);

  bool occupied(int row, int lane) const {
    return occupancy[static_cast<std::size_t>(row * lanes + lane)] != 0;
  }
  void set_occupied(int row, int lane, bool value) {
    occupancy[static_cast<std::size_t>(row * lanes + lane)] = value ? 1 : 0;
  }
  double speed_limit(int row, int lane) const {
    return speed_limits[static_cast<std::size_t>(row * lanes + lane)];
  }
  void set_speed_limit(int row, int lane, double v) {
    speed_limits[static_cast<std::size_t>(row * lanes + lane)] = v;
  }

  friend bool operator==(const Scene&, const Scene&) = default;
};

// True iff every cell of the row is occupied.
bool is_blocked_row(const Scene& scene, int row);

// [occupancy, speed_limits / v_max, n0 / (W/2), v0 / v_max], row-major.
std::vector<double> encode_observation(const Scene& scene, double v_max);
std::size_t observation_size(int lanes, int layers);

// Text snapshot:
//   W H_s n0 v0
//   H_s lines of W occupancy digits
//   H_s lines of W space-separated speed limits
std::string scene_to_text(const Scene& scene);
Scene scene_from_text(std::string_view text);

}  // namespace trajrl

#endif  // TRAJRL_SCENE_H_
