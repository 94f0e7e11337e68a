#include "run_config.h"

#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "trajrl/checkpoint.h"
#include "trajrl/errors.h"
#include "trajrl/io.h"

namespace trajrl::cli {

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what) {
  const int line = node.Mark().line;
  throw FormatError(line >= 0 ? "config line " + std::to_string(line + 1) + ": " + what
                              : "config: " + what);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail_at(node, "'" + key + "' must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(node, "bad value '" + node.Scalar() + "' for '" + key + "'");
  }
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) fail_at(node, "'" + key + "' must be a list");
  std::vector<double> out;
  for (const auto& item : node) out.push_back(scalar<double>(item, key));
  return out;
}

using Setter = std::function<void(const YAML::Node&, const std::string&)>;

template <typename T>
Setter set(T& field) {
  return [&field](const YAML::Node& n, const std::string& k) { field = scalar<T>(n, k); };
}

Setter set_list(std::vector<double>& field) {
  return [&field](const YAML::Node& n, const std::string& k) { field = number_list(n, k); };
}

template <typename E>
Setter set_enum(E& field, std::map<std::string, E> names) {
  return [&field, names](const YAML::Node& n, const std::string& k) {
    const auto s = scalar<std::string>(n, k);
    const auto it = names.find(s);
    if (it == names.end()) fail_at(n, "unknown value '" + s + "' for '" + k + "'");
    field = it->second;
  };
}

using Schema = std::map<std::string, Setter>;

void apply(const YAML::Node& map, const std::string& section, const Schema& schema) {
  if (!map.IsMap()) fail_at(map, "'" + section + "' must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    const auto it = schema.find(key);
    if (it == schema.end())
      fail_at(kv.first, "unknown key '" + key + "' in section '" + section + "'");
    it->second(kv.second, key);
  }
}

const std::map<std::string, cost::CurvatureForm> kCurvatureNames = {
    {"second_difference", cost::CurvatureForm::kSecondDifference},
    {"verbatim", cost::CurvatureForm::kVerbatim}};
const std::map<std::string, cost::CentripetalForm> kCentripetalNames = {
    {"as_written", cost::CentripetalForm::kAsWritten},
    {"physical", cost::CentripetalForm::kPhysical}};

template <typename E>
std::string enum_name(const std::map<std::string, E>& names, E value) {
  for (const auto& [k, v] : names)
    if (v == value) return k;
  return "?";
}

struct Sections {
  Schema environment, cost, safety, search, ppo;
};

Sections schema_for(RunConfig& c) {
  auto& e = c.episode;
  auto& l = e.lattice;
  auto& w = e.weights;
  auto& s = e.safety;
  auto& p = c.ppo;
  Sections x;
  x.environment = {{"lanes", set(l.lanes)},
                   {"sensor_layers", set(l.sensor_layers)},
                   {"plan_layers", set(l.plan_layers)},
                   {"v_max", set(l.v_max)},
                   {"dn_max", set(l.dn_max)},
                   {"dv_max", set(l.dv_max)},
                   {"layer_spacing", set(l.layer_spacing)},
                   {"lane_width", set(l.lane_width)},
                   {"halt_speed", set(l.halt_speed)},
                   {"p_obstacle", set(e.p_obstacle)},
                   {"max_steps", set(e.max_steps)},
                   {"move_layers", set(e.move_layers)},
                   {"v_init", set(e.v_init)},
                   {"speed_patch_mean", set(e.speed_patch_mean)},
                   {"safety_gating", set(e.safety_gating)}};
  x.cost = {{"w_speed_error", set(w.speed_error)},
            {"w_acceleration", set(w.acceleration)},
            {"w_jerk", set(w.jerk)},
            {"w_extra_distance", set(w.extra_distance)},
            {"w_curvature", set(w.curvature)},
            {"w_lane_crossing", set(w.lane_crossing)},
            {"w_centripetal", set(w.centripetal)},
            {"curvature", set_enum(s.cost_options.curvature, kCurvatureNames)},
            {"centripetal", set_enum(s.cost_options.centripetal, kCentripetalNames)}};
  x.safety = {{"tau", set(s.tau)}, {"c_max", set(s.c_max)}, {"speed_levels", set_list(s.speed_levels)}};
  x.search = {{"speed_levels", set_list(c.search.speed_levels)},
              {"allow_halt", set(c.search.allow_halt)}};
  x.ppo = {{"n_envs", set(p.n_envs)},
           {"n_steps", set(p.n_steps)},
           {"minibatch_size", set(p.minibatch_size)},
           {"gamma", set(p.gamma)},
           {"learning_rate", set(p.learning_rate)},
           {"ent_coef", set(p.ent_coef)},
           {"clip", set(p.clip)},
           {"n_epochs", set(p.n_epochs)},
           {"gae_lambda", set(p.gae_lambda)},
           {"total_steps", set(p.total_steps)},
           {"vf_coef", set(p.vf_coef)},
           {"max_grad_norm", set(p.max_grad_norm)},
           {"adam_beta1", set(p.adam_beta1)},
           {"adam_beta2", set(p.adam_beta2)},
           {"adam_eps", set(p.adam_eps)},
           {"rolling_window", set(p.rolling_window)}};
  return x;
}

std::string list_text(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s + "]";
}

}  // namespace

void RunConfig::sync() {
  ppo.seed = seed;
  episode.rng_seed = seed;
  search.dn_max = episode.lattice.dn_max;
  search.horizon = episode.lattice.plan_layers;
}

void RunConfig::validate() const {
  episode.validate();
  ppo.validate();
  search.validate();
  if (out_dir.empty()) throw Error("out_dir must not be empty");
}

RunConfig parse_run_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw FormatError("config line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  RunConfig c;
  if (root.IsNull()) {
    c.sync();
    return c;
  }
  if (!root.IsMap()) fail_at(root, "expected a mapping at the top level");
  Sections schema = schema_for(c);
  const std::map<std::string, Schema*> sections = {{"environment", &schema.environment},
                                                   {"cost", &schema.cost},
                                                   {"safety", &schema.safety},
                                                   {"search", &schema.search},
                                                   {"ppo", &schema.ppo}};
  std::map<std::string, YAML::Node> seen;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key == "seed") {
      c.seed = scalar<std::uint64_t>(kv.second, key);
    } else if (key == "out_dir") {
      c.out_dir = scalar<std::string>(kv.second, key);
    } else if (auto it = sections.find(key); it != sections.end()) {
      apply(kv.second, key, *it->second);
      seen[key] = kv.first;
    } else {
      fail_at(kv.first, "unknown key '" + key + "'");
    }
  }
  c.sync();
  // Attach semantic errors to the section that most likely caused them.
  auto check = [&](const std::string& section, const std::function<void()>& f) {
    try {
      f();
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      if (auto it = seen.find(section); it != seen.end()) fail_at(it->second, e.what());
      throw FormatError(std::string("config: ") + e.what());
    }
  };
  check("environment", [&] { c.episode.lattice.validate(); });
  check("cost", [&] { c.episode.weights.validate(); });
  check("safety", [&] { c.episode.safety.validate(); });
  check("environment", [&] { c.episode.validate(); });
  check("search", [&] { c.search.validate(); });
  check("ppo", [&] { c.ppo.validate(); });
  if (c.out_dir.empty()) throw FormatError("config: out_dir must not be empty");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path));
}

std::string to_text(const RunConfig& config) {
  const RunConfig& c = config;
  const auto& e = c.episode;
  const auto& l = e.lattice;
  const auto& w = e.weights;
  const auto& s = e.safety;
  const auto& p = c.ppo;
  auto num = [](double v) { return format_double(v); };
  std::ostringstream o;
  o << "seed: " << c.seed << "\n";
  YAML::Emitter dir;
  dir << YAML::DoubleQuoted << c.out_dir;
  o << "out_dir: " << dir.c_str() << "\n";
  o << "environment:\n"
    << "  lanes: " << l.lanes << "\n"
    << "  sensor_layers: " << l.sensor_layers << "\n"
    << "  plan_layers: " << l.plan_layers << "\n"
    << "  v_max: " << num(l.v_max) << "\n"
    << "  dn_max: " << l.dn_max << "\n"
    << "  dv_max: " << num(l.dv_max) << "\n"
    << "  layer_spacing: " << num(l.layer_spacing) << "\n"
    << "  lane_width: " << num(l.lane_width) << "\n"
    << "  halt_speed: " << num(l.halt_speed) << "\n"
    << "  p_obstacle: " << num(e.p_obstacle) << "\n"
    << "  max_steps: " << e.max_steps << "\n"
    << "  move_layers: " << e.move_layers << "\n"
    << "  v_init: " << num(e.v_init) << "\n"
    << "  speed_patch_mean: " << num(e.speed_patch_mean) << "\n"
    << "  safety_gating: " << (e.safety_gating ? "true" : "false") << "\n";
  o << "cost:\n"
    << "  w_speed_error: " << num(w.speed_error) << "\n"
    << "  w_acceleration: " << num(w.acceleration) << "\n"
    << "  w_jerk: " << num(w.jerk) << "\n"
    << "  w_extra_distance: " << num(w.extra_distance) << "\n"
    << "  w_curvature: " << num(w.curvature) << "\n"
    << "  w_lane_crossing: " << num(w.lane_crossing) << "\n"
    << "  w_centripetal: " << num(w.centripetal) << "\n"
    << "  curvature: " << enum_name(kCurvatureNames, s.cost_options.curvature) << "\n"
    << "  centripetal: " << enum_name(kCentripetalNames, s.cost_options.centripetal) << "\n";
  o << "safety:\n"
    << "  tau: " << num(s.tau) << "\n"
    << "  c_max: " << num(s.c_max) << "\n"
    << "  speed_levels: " << list_text(s.speed_levels) << "\n";
  o << "search:\n"
    << "  speed_levels: " << list_text(c.search.speed_levels) << "\n"
    << "  allow_halt: " << (c.search.allow_halt ? "true" : "false") << "\n";
  o << "ppo:\n"
    << "  n_envs: " << p.n_envs << "\n"
    << "  n_steps: " << p.n_steps << "\n"
    << "  minibatch_size: " << p.minibatch_size << "\n"
    << "  gamma: " << num(p.gamma) << "\n"
    << "  learning_rate: " << num(p.learning_rate) << "\n"
    << "  ent_coef: " << num(p.ent_coef) << "\n"
    << "  clip: " << num(p.clip) << "\n"
    << "  n_epochs: " << p.n_epochs << "\n"
    << "  gae_lambda: " << num(p.gae_lambda) << "\n"
    << "  total_steps: " << p.total_steps << "\n"
    << "  vf_coef: " << num(p.vf_coef) << "\n"
    << "  max_grad_norm: " << num(p.max_grad_norm) << "\n"
    << "  adam_beta1: " << num(p.adam_beta1) << "\n"
    << "  adam_beta2: " << num(p.adam_beta2) << "\n"
    << "  adam_eps: " << num(p.adam_eps) << "\n"
    << "  rolling_window: " << p.rolling_window << "\n";
  return o.str();
}

std::uint64_t config_hash(const RunConfig& config) {
  return policy::fnv1a64(to_text(config));
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace trajrl::cli
