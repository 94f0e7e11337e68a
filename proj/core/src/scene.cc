#include "trajrl/scene.h"

#include <charconv>
#include <sstream>

#include "trajrl/errors.h"

namespace trajrl {

Scene::Scene(int lanes_in, int layers_in, double fill_speed)
    : lanes(lanes_in),
      layers(layers_in),
      occupancy(static_cast<std::size_t>(lanes_in * layers_in), 0),
      speed_limits(static_cast<std::size_t>(lanes_in * layers_in), fill_speed) {}

bool is_blocked_row(const Scene& scene, int row) {
  for (int c = 0; c < scene.lanes; ++c)
    if (!scene.occupied(row, c)) return false;
  return true;
}

std::size_t observation_size(int lanes, int layers) {
  return static_cast<std::size_t>(2 * lanes * layers + 2);
}

std::vector<double> encode_observation(const Scene& scene, double v_max) {
  std::vector<double> obs;
  obs.reserve(observation_size(scene.lanes, scene.layers));
  for (auto cell : scene.occupancy) obs.push_back(cell ? 1.0 : 0.0);
  for (double limit : scene.speed_limits) obs.push_back(limit / v_max);
  obs.push_back(scene.n0 / (0.5 * scene.lanes));
  obs.push_back(scene.v0 / v_max);
  return obs;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string scene_to_text(const Scene& scene) {
  std::ostringstream out;
  out << scene.lanes << ' ' << scene.layers << ' ' << format_double(scene.n0)
      << ' ' << format_double(scene.v0) << '\n';
  for (int r = 0; r < scene.layers; ++r) {
    for (int c = 0; c < scene.lanes; ++c) out << (scene.occupied(r, c) ? '1' : '0');
    out << '\n';
  }
  for (int r = 0; r < scene.layers; ++r) {
    for (int c = 0; c < scene.lanes; ++c) {
      if (c) out << ' ';
      out << format_double(scene.speed_limit(r, c));
    }
    out << '\n';
  }
  return out.str();
}

Scene scene_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) -> FormatError {
    return FormatError("scene line " + std::to_string(line_no) + ": " + what);
  };
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) throw fail("missing header");
  int lanes = 0, layers = 0;
  double n0 = 0, v0 = 0;
  {
    std::istringstream header(line);
    if (!(header >> lanes >> layers >> n0 >> v0)) throw fail("expected 'W H_s n0 v0'");
    std::string extra;
    if (header >> extra) throw fail("trailing tokens in header");
  }
  if (lanes < 1 || layers < 1) throw fail("W and H_s must be positive");
  Scene scene(lanes, layers);
  scene.n0 = n0;
  scene.v0 = v0;
  for (int r = 0; r < layers; ++r) {
    if (!next_line()) throw fail("missing occupancy row");
    std::string row = line;
    while (!row.empty() && (row.back() == '\r' || row.back() == ' ')) row.pop_back();
    if (static_cast<int>(row.size()) != lanes) throw fail("occupancy row needs W digits");
    for (int c = 0; c < lanes; ++c) {
      if (row[c] != '0' && row[c] != '1') throw fail("occupancy digits must be 0/1");
      scene.set_occupied(r, c, row[c] == '1');
    }
  }
  for (int r = 0; r < layers; ++r) {
    if (!next_line()) throw fail("missing speed-limit row");
    std::istringstream row(line);
    for (int c = 0; c < lanes; ++c) {
      double v;
      if (!(row >> v) || v < 0) throw fail("speed limits must be W nonnegative reals");
      scene.set_speed_limit(r, c, v);
    }
    std::string extra;
    if (row >> extra) throw fail("trailing tokens in speed-limit row");
  }
  if (next_line()) throw fail("unexpected trailing content");
  return scene;
}

}  // namespace trajrl
