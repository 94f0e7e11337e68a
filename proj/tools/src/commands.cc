#include "commands.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "svg.h"
#include "trace.h"
#include "trajrl/errors.h"
#include "trajrl/geometry.h"
#include "trajrl/io.h"
#include "trajrl/random.h"
#include "trajrl/safety.h"

namespace trajrl::cli {

namespace {

std::string csv_num(double v) { return format_double(v); }

// Same configuration apart from the training budget.
bool same_run(RunConfig a, RunConfig b) {
  a.ppo.total_steps = 0;
  b.ppo.total_steps = 0;
  a.out_dir = b.out_dir;
  return to_text(a) == to_text(b);
}

std::string training_curve_svg(const std::vector<policy::EpisodeRecord>& episodes,
                               int window, const std::string& hash) {
  std::vector<double> returns;
  for (const auto& e : episodes) returns.push_back(e.episode_return);
  const auto median = policy::rolling_median(returns, window);
  const std::size_t stride = std::max<std::size_t>(1, median.size() / 2000);
  Series s{"rolling median (" + std::to_string(window) + ")", "#1f77b4", {}, false};
  for (std::size_t i = 0; i < median.size(); i += stride)
    s.points.emplace_back(static_cast<double>(episodes[i].env_steps), median[i]);
  if (!median.empty())
    s.points.emplace_back(static_cast<double>(episodes.back().env_steps), median.back());
  return line_chart({s}, "Episode reward", "environment steps", "episode reward",
                    "config_hash " + hash);
}

policy::Checkpoint make_checkpoint(const RunConfig& config, const policy::TrainingState& state) {
  return {state, to_text(config), config_hash(config)};
}

}  // namespace

void write_manifest(const fs::path& out_dir, const std::string& command, const RunConfig& config,
                    const std::vector<fs::path>& files) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = hash_hex(config_hash(config));
  j["seed"] = config.seed;
  j["files"] = nlohmann::json::array();
  for (const auto& f : files) j["files"].push_back(f.filename().string());
  write_file_atomic(out_dir / ("manifest_" + command + ".json"), j.dump(2) + "\n");
}

std::string history_csv(const std::vector<policy::EpisodeRecord>& episodes, int window) {
  std::vector<double> returns;
  for (const auto& e : episodes) returns.push_back(e.episode_return);
  const auto median = policy::rolling_median(returns, window);
  std::ostringstream o;
  o << "episode,env,seed,return,length,terminal,env_steps,rolling_median\n";
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const auto& e = episodes[i];
    o << i << ',' << e.env << ',' << e.seed << ',' << csv_num(e.episode_return) << ','
      << e.length << ',' << env::terminal_name(e.terminal) << ',' << e.env_steps << ','
      << csv_num(median[i]) << '\n';
  }
  return o.str();
}

TrainArtifacts run_training(const RunConfig& config, std::optional<policy::Checkpoint> resume,
                            std::ostream& log, int checkpoint_every) {
  config.validate();
  const fs::path dir = config.out_dir;
  fs::create_directories(dir);
  TrainArtifacts out;
  out.checkpoint = dir / "checkpoint.txt";
  out.history_csv = dir / "rewards.csv";
  out.curve_svg = dir / "training_curve.svg";
  out.config_copy = dir / "config.yaml";
  const std::string hash = hash_hex(config_hash(config));
  write_file_atomic(out.config_copy, to_text(config));

  std::optional<policy::TrainingState> start;
  if (resume) {
    const RunConfig previous = parse_run_config(resume->config_text);
    if (!same_run(previous, config))
      throw Error("checkpoint was trained with a different configuration");
    start = std::move(resume->state);
    log << "resuming at update " << start->updates << ", " << start->env_steps << " steps\n";
  }

  policy::TrainHooks hooks;
  hooks.on_update = [&](const policy::TrainingState& s, const policy::UpdateStats& u) {
    const std::size_t n = std::min<std::size_t>(s.episodes.size(), 100);
    double recent = 0.0;
    for (std::size_t i = s.episodes.size() - n; i < s.episodes.size(); ++i)
      recent += s.episodes[i].episode_return;
    log << "update " << s.updates << " steps " << s.env_steps << " episodes "
        << s.episodes.size() << " mean_return_100 " << (n ? recent / n : 0.0) << " loss "
        << u.mean_loss << '\n';
    if (checkpoint_every > 0 && s.updates % checkpoint_every == 0)
      policy::save_checkpoint(out.checkpoint, make_checkpoint(config, s));
  };
  out.state = policy::train(config.ppo, config.episode, std::move(start), hooks);

  policy::save_checkpoint(out.checkpoint, make_checkpoint(config, out.state));
  write_file_atomic(out.history_csv, history_csv(out.state.episodes, config.ppo.rolling_window));
  write_file_atomic(out.curve_svg,
                    training_curve_svg(out.state.episodes, config.ppo.rolling_window, hash));
  write_manifest(dir, "train", config,
                 {out.config_copy, out.checkpoint, out.history_csv, out.curve_svg});
  log << "wrote " << out.checkpoint.string() << '\n';
  return out;
}

TrainArtifacts cmd_train(const fs::path& config_path, const std::optional<fs::path>& resume,
                         std::ostream& log) {
  const RunConfig config = load_run_config(config_path);
  std::optional<policy::Checkpoint> ckpt;
  if (resume) ckpt = policy::load_checkpoint(*resume);
  return run_training(config, std::move(ckpt), log);
}

std::pair<RunConfig, policy::Checkpoint> load_trained(const fs::path& checkpoint) {
  policy::Checkpoint ckpt = policy::load_checkpoint(checkpoint);
  RunConfig config = parse_run_config(ckpt.config_text);
  if (ckpt.state.params.dims() != policy::dims_for(config.episode))
    throw FormatError("checkpoint parameters do not match its configuration");
  return {std::move(config), std::move(ckpt)};
}

CompareReport run_compare(const RunConfig& config, const policy::PolicyParams& params,
                          int episodes, std::uint64_t seed) {
  const env::EpisodeConfig eval_config = eval::evaluation_config(config.episode);
  CompareReport r;
  r.campaign = eval::run_campaign(eval_config, eval::exhaustive_actor(config.search),
                                  eval::rl_actor(params), episodes, seed);
  r.table = cost::compare_planners(r.campaign.metrics_a, r.campaign.metrics_b, "exhaustive", "rl");

  std::ostringstream o;
  o << r.table.to_text();
  auto count = [](const std::vector<env::TerminalKind>& v, env::TerminalKind k) {
    return std::count(v.begin(), v.end(), k);
  };
  auto terminals = [&](const std::string& name, const std::vector<env::TerminalKind>& v,
                       int stops) {
    o << name << ": success " << count(v, env::TerminalKind::kSuccess) << ", collision "
      << count(v, env::TerminalKind::kCollision) << ", no_path "
      << count(v, env::TerminalKind::kNoPath) << ", episodes with safety stop " << stops
      << '\n';
  };
  terminals("exhaustive", r.campaign.terminals_a, r.campaign.safety_stops_a);
  terminals("rl", r.campaign.terminals_b, r.campaign.safety_stops_b);
  o << "lower is better for rl on:";
  for (const auto& row : r.table.rows) {
    if (row.key == "jerk" || row.key == "curvature" || row.key == "centripetal_acc" ||
        row.key == "extra_distance")
      o << ' ' << row.key << '=' << (row.mean_b < row.mean_a ? "yes" : "no");
  }
  o << '\n';
  r.summary = o.str();
  return r;
}

CompareReport cmd_compare(const fs::path& checkpoint, int episodes, std::uint64_t seed,
                          const fs::path& out_dir, std::ostream& log) {
  if (episodes < 1) throw UsageError("--episodes must be positive");
  auto [config, ckpt] = load_trained(checkpoint);
  CompareReport r = run_compare(config, ckpt.state.params, episodes, seed);

  std::ostringstream per;
  per << "episode,seed,planner,terminal,return,safety_stop";
  for (const auto& f : cost::metric_fields()) per << ',' << f.name;
  per << '\n';
  const auto& c = r.campaign;
  auto rows = [&](const std::string& name, const std::vector<cost::EpisodeMetrics>& m,
                  const std::vector<env::TerminalKind>& t, const std::vector<double>& ret,
                  const std::vector<std::uint8_t>& stopped, std::size_t i) {
    per << i << ',' << c.seeds[i] << ',' << name << ',' << env::terminal_name(t[i]) << ','
        << csv_num(ret[i]) << ',' << static_cast<int>(stopped[i]);
    for (const auto& f : cost::metric_fields()) per << ',' << csv_num(m[i].*f.member);
    per << '\n';
  };
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    rows("exhaustive", c.metrics_a, c.terminals_a, c.returns_a, c.stopped_a, i);
    rows("rl", c.metrics_b, c.terminals_b, c.returns_b, c.stopped_b, i);
  }
  fs::create_directories(out_dir);
  const fs::path episodes_csv = out_dir / "episodes.csv";
  const fs::path table_csv = out_dir / "comparison.csv";
  const fs::path summary_txt = out_dir / "summary.txt";
  write_file_atomic(episodes_csv, per.str());
  write_file_atomic(table_csv, r.table.to_csv());
  write_file_atomic(summary_txt, r.summary);
  write_manifest(out_dir, "compare", config, {episodes_csv, table_csv, summary_txt});
  log << r.summary;
  return r;
}

BenchReport run_bench(const RunConfig& config, const policy::PolicyParams& params,
                      const BenchOptions& options) {
  if (options.scenes < 1 || options.queries < 1)
    throw UsageError("scene and query counts must be positive");
  const env::EpisodeConfig& e = config.episode;
  std::vector<Scene> scenes;
  for (int i = 0; i < options.scenes; ++i) {
    std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(i)));
    scenes.push_back(env::generate_scene(e, rng));
  }
  const search::Planner rl = [&](const Scene& s) {
    return policy::plan_rl(params, s, e.lattice, e.safety);
  };
  const search::Planner exhaustive = [&](const Scene& s) {
    return search::plan_exhaustive(s, e.weights, e.lattice, config.search, e.safety).trajectory;
  };
  BenchReport r;
  const auto q = static_cast<std::size_t>(options.queries);
  r.exhaustive = search::query_latency(exhaustive, scenes, q);
  r.rl = search::query_latency(rl, scenes, q);
  r.ratio = r.exhaustive.mean_s / r.rl.mean_s;
  std::ostringstream o;
  o << "planner,mean_s,stderr_s,queries\n"
    << "rl," << csv_num(r.rl.mean_s) << ',' << csv_num(r.rl.stderr_s) << ',' << r.rl.queries << '\n'
    << "exhaustive," << csv_num(r.exhaustive.mean_s) << ',' << csv_num(r.exhaustive.stderr_s) << ','
    << r.exhaustive.queries << '\n'
    << "ratio_exhaustive_over_rl," << csv_num(r.ratio) << ",,\n";
  r.text = o.str();
  return r;
}

BenchReport cmd_bench(const fs::path& checkpoint, const BenchOptions& options, std::ostream& log) {
  auto [config, ckpt] = load_trained(checkpoint);
  BenchReport r = run_bench(config, ckpt.state.params, options);
  log << r.text;
  return r;
}

PlotArtifacts cmd_plot(const fs::path& trace_path, const fs::path& out_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(trace_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("trace is not valid JSON: ") + e.what());
  }
  const PlotTrace t = trace_from_json(j);
  const int lanes = t.initial.lanes;
  const double ls = t.layer_spacing;

  // Absolute road layers seen over the episode. Layer 0 is the start.
  std::map<int, std::pair<std::vector<bool>, std::vector<double>>> road;
  auto add_rows = [&](const Scene& s, int progress) {
    for (int r = 0; r < s.layers; ++r) {
      auto& row = road[progress + 1 + r];
      row.first.assign(static_cast<std::size_t>(lanes), false);
      row.second.assign(static_cast<std::size_t>(lanes), 0.0);
      for (int c = 0; c < lanes; ++c) {
        row.first[static_cast<std::size_t>(c)] = s.occupied(r, c);
        row.second[static_cast<std::size_t>(c)] = s.speed_limit(r, c);
      }
    }
  };
  add_rows(t.initial, 0);
  for (const auto& s : t.steps) add_rows(s.scene, s.progress);

  PlotArtifacts out;
  std::vector<int> point_layers;
  auto push = [&](int layer, const LatticePoint& p) {
    point_layers.push_back(layer);
    out.points.emplace_back(layer * ls, p.n);
    out.speeds.push_back(p.v);
  };
  push(0, {t.initial.n0, t.initial.v0});
  for (const auto& s : t.steps)
    for (std::size_t k = 0; k < s.executed.size(); ++k)
      push(s.progress + 1 + static_cast<int>(k), s.executed[k]);

  if (out.points.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& [x, y] : out.points) {
      xs.push_back(x);
      ys.push_back(y);
    }
    const geometry::CubicSpline spline = geometry::fit_trajectory_spline(xs, ys);
    for (int i = 0; i < kSplineSamples; ++i) {
      const double x = xs.front() + (xs.back() - xs.front()) * i / (kSplineSamples - 1);
      out.spline.emplace_back(x, spline(x));
    }
  }

  fs::create_directories(out_dir);
  out.path_csv = out_dir / "path.csv";
  out.spline_csv = out_dir / "spline.csv";
  out.velocity_csv = out_dir / "velocity.csv";
  out.path_svg = out_dir / "path.svg";
  out.velocity_svg = out_dir / "velocity.svg";

  std::ostringstream pc, sc, vc;
  pc << "layer,s,n,v\n";
  vc << "layer,v,speed_limit\n";
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    pc << point_layers[i] << ',' << csv_num(out.points[i].first) << ','
       << csv_num(out.points[i].second) << ',' << csv_num(out.speeds[i]) << '\n';
    vc << point_layers[i] << ',' << csv_num(out.speeds[i]) << ',';
    if (auto it = road.find(point_layers[i]); it != road.end())
      vc << csv_num(it->second.second[static_cast<std::size_t>(lane_of(out.points[i].second, lanes))]);
    vc << '\n';
  }
  sc << "s,n\n";
  for (const auto& [x, y] : out.spline) sc << csv_num(x) << ',' << csv_num(y) << '\n';

  // Grid: layers left to right, larger lateral offset on top.
  const double cell = 24, left = 30, top = 40;
  const int last_layer = road.empty() ? 1 : road.rbegin()->first;
  double v_top = 1.0;
  for (const auto& [layer, row] : road)
    for (double v : row.second) v_top = std::max(v_top, v);
  const double width = left * 2 + (last_layer + 1) * cell;
  const double height = top + lanes * cell + 40;
  auto px = [&](double s) { return left + (s / ls) * cell + cell / 2; };
  auto py = [&](double n) { return top + (lanes / 2.0 - n) * cell; };
  Svg svg(width, height, "Planned path");
  svg.comment("config_hash " + j.value("config_hash", std::string()));
  for (const auto& [layer, row] : road) {
    for (int c = 0; c < lanes; ++c) {
      const double x = left + layer * cell;
      const double y = py(c + 1 - lanes / 2.0);
      std::string fill;
      if (row.first[static_cast<std::size_t>(c)]) {
        fill = "#7f1d1d";
      } else {
        const int shade = 245 - static_cast<int>(std::lround(
                                    110 * row.second[static_cast<std::size_t>(c)] / v_top));
        fill = "rgb(" + std::to_string(shade) + "," + std::to_string(shade) + ",255)";
      }
      svg.rect(x, y, cell, cell, fill, "#cccccc");
    }
  }
  std::vector<std::pair<double, double>> curve;
  for (const auto& [x, y] : out.spline) curve.emplace_back(px(x), py(y));
  svg.polyline(curve, "#ff7f0e", 2.0);
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    svg.circle(px(out.points[i].first), py(out.points[i].second), 4, "#111111");
    svg.text(px(out.points[i].first), py(out.points[i].second) - 7,
             csv_num(std::round(out.speeds[i] * 100) / 100), 8, "middle");
  }
  svg.text(left, 20, "return " + csv_num(t.episode_return), 12);

  Series speed{"speed", "#1f77b4", {}, true};
  Series limit{"speed limit", "#2ca02c", {}, false};
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    speed.points.emplace_back(point_layers[i], out.speeds[i]);
    if (auto it = road.find(point_layers[i]); it != road.end())
      limit.points.emplace_back(point_layers[i],
                                it->second.second[static_cast<std::size_t>(lane_of(out.points[i].second, lanes))]);
  }

  write_file_atomic(out.path_csv, pc.str());
  write_file_atomic(out.spline_csv, sc.str());
  write_file_atomic(out.velocity_csv, vc.str());
  write_file_atomic(out.path_svg, svg.str());
  write_file_atomic(out.velocity_svg,
                    line_chart({speed, limit}, "Velocity profile", "layer", "speed (cells/step)",
                               "config_hash " + j.value("config_hash", std::string())));
  return out;
}

nlohmann::json run_replay(const Scene& scene, const std::string& planner, const RunConfig& config,
                          const std::optional<policy::PolicyParams>& params) {
  eval::Actor actor;
  if (planner == "rl") {
    if (!params) throw UsageError("the rl planner needs --ckpt");
    actor = eval::rl_actor(*params);
  } else if (planner == "exhaustive") {
    actor = eval::exhaustive_actor(config.search);
  } else {
    throw UsageError("unknown planner '" + planner + "'");
  }
  RunConfig c = config;
  if (scene.lanes != c.episode.lattice.lanes || scene.layers != c.episode.lattice.sensor_layers) {
    if (params) throw ShapeMismatch("scene size does not match the trained policy");
    c.episode.lattice.lanes = scene.lanes;
    c.episode.lattice.sensor_layers = scene.layers;
    c.episode.lattice.plan_layers = std::min(c.episode.lattice.plan_layers, scene.layers);
    c.episode.move_layers = 1;
    c.sync();
  }
  env::Environment environment =
      env::Environment::from_scene(eval::evaluation_config(c.episode), scene);
  environment.reset();
  const eval::EpisodeTrace trace = eval::run_episode(environment, actor);
  nlohmann::json j = trace_to_json(trace, scene, planner, hash_hex(config_hash(c)));
  j["layer_spacing"] = c.episode.lattice.layer_spacing;
  return j;
}

nlohmann::json cmd_replay(const fs::path& scene_path, const std::string& planner,
                          const std::optional<fs::path>& checkpoint,
                          const std::optional<fs::path>& config_path) {
  if (planner != "rl" && planner != "exhaustive")
    throw UsageError("--planner must be rl or exhaustive");
  if (planner == "rl" && !checkpoint) throw UsageError("the rl planner needs --ckpt");
  const Scene scene = scene_from_text(read_file(scene_path));
  RunConfig config;
  std::optional<policy::PolicyParams> params;
  if (checkpoint) {
    auto [c, ckpt] = load_trained(*checkpoint);
    config = std::move(c);
    params = std::move(ckpt.state.params);
  } else if (config_path) {
    config = load_run_config(*config_path);
  }
  return run_replay(scene, planner, config, params);
}

}  // namespace trajrl::cli
