#include "trajrl/ppo.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "trajrl/errors.h"
#include "trajrl/random.h"

namespace trajrl::policy {

namespace {

std::vector<std::span<double>> tensors(PolicyParams& p) {
  std::vector<std::span<double>> out;
  auto add_net = [&](Mlp& net) {
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
      out.emplace_back(net.weights[k].data(), static_cast<std::size_t>(net.weights[k].size()));
      out.emplace_back(net.biases[k].data(), static_cast<std::size_t>(net.biases[k].size()));
    }
  };
  add_net(p.policy);
  out.emplace_back(p.log_std.data(), static_cast<std::size_t>(p.log_std.size()));
  add_net(p.value);
  return out;
}

std::vector<std::span<const double>> tensors(const PolicyParams& p) {
  auto mut = tensors(const_cast<PolicyParams&>(p));
  return {mut.begin(), mut.end()};
}

void set_zero(PolicyParams& p) {
  for (auto t : tensors(p)) std::fill(t.begin(), t.end(), 0.0);
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, std::span<const std::size_t> indices) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(indices[i]));
  return out;
}

double column_log_prob(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mean, Eigen::Index col,
                       const Eigen::VectorXd& log_std) {
  const Eigen::VectorXd xc = x.col(col);
  return gaussian_log_prob(std::span<const double>(xc.data(), static_cast<std::size_t>(xc.size())),
                           mean.col(col), log_std);
}

}  // namespace

void PpoConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error("invalid PPO config: " + what); };
  if (n_envs < 1) fail("n_envs must be positive");
  if (n_steps < 1) fail("n_steps must be positive");
  if (minibatch_size < 1) fail("minibatch_size must be positive");
  if (batch_size() % minibatch_size != 0)
    fail("n_envs * n_steps must be divisible by minibatch_size");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must lie in [0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda must lie in [0, 1]");
  if (!(learning_rate >= 0.0)) fail("learning_rate must be non-negative");
  if (!(ent_coef >= 0.0)) fail("ent_coef must be non-negative");
  if (!(clip > 0.0)) fail("clip must be positive");
  if (n_epochs < 1) fail("n_epochs must be positive");
  if (total_steps < 1) fail("total_steps must be positive");
  if (!(vf_coef >= 0.0)) fail("vf_coef must be non-negative");
  if (!(max_grad_norm > 0.0)) fail("max_grad_norm must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) fail("adam_beta1 must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) fail("adam_beta2 must lie in [0, 1)");
  if (!(adam_eps > 0.0)) fail("adam_eps must be positive");
  if (rolling_window < 1) fail("rolling_window must be positive");
}

Gae compute_gae(std::span<const double> rewards, std::span<const double> values,
                std::span<const std::uint8_t> dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1)
    throw LengthMismatch("values must have one entry more than rewards");
  if (dones.size() != n) throw LengthMismatch("dones and rewards differ in length");
  Gae out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double gae = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * values[t + 1] * live - values[t];
    gae = delta + gamma * lambda * live * gae;
    out.advantages[t] = gae;
    out.returns[t] = gae + values[t];
  }
  return out;
}

void compute_advantages(RolloutBatch& batch, double gamma, double lambda) {
  const auto t_len = static_cast<std::size_t>(batch.n_steps);
  batch.advantages.assign(batch.size(), 0.0);
  batch.returns.assign(batch.size(), 0.0);
  std::vector<double> values(t_len + 1);
  for (int e = 0; e < batch.n_envs; ++e) {
    const std::size_t first = batch.index(e, 0);
    std::copy_n(batch.values.begin() + static_cast<std::ptrdiff_t>(first), t_len, values.begin());
    values[t_len] = batch.bootstrap_values[static_cast<std::size_t>(e)];
    const Gae g = compute_gae(std::span(batch.rewards).subspan(first, t_len), values,
                              std::span(batch.dones).subspan(first, t_len), gamma, lambda);
    std::copy(g.advantages.begin(), g.advantages.end(),
              batch.advantages.begin() + static_cast<std::ptrdiff_t>(first));
    std::copy(g.returns.begin(), g.returns.end(),
              batch.returns.begin() + static_cast<std::ptrdiff_t>(first));
  }
}

std::vector<double> normalize(std::span<const double> x) {
  if (x.empty()) return {};
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / (sd + 1e-8);
  return out;
}

LossParts ppo_loss(const PolicyParams& params, const RolloutBatch& batch,
                   std::span<const std::size_t> indices, std::span<const double> advantages,
                   const PpoConfig& config, PolicyParams* grad) {
  const auto m = static_cast<Eigen::Index>(indices.size());
  if (m == 0) throw LengthMismatch("empty minibatch");
  const double inv_m = 1.0 / static_cast<double>(m);
  const Eigen::MatrixXd x = gather(batch.observations, indices);
  const Eigen::MatrixXd a = gather(batch.actions, indices);

  Mlp::Cache policy_cache, value_cache;
  const Eigen::MatrixXd mean = params.policy.forward(x, grad ? &policy_cache : nullptr);
  const Eigen::MatrixXd value = params.value.forward(x, grad ? &value_cache : nullptr);
  const Eigen::ArrayXd inv_var = (-2.0 * params.log_std.array()).exp();

  LossParts parts;
  Eigen::MatrixXd d_mean(mean.rows(), m);
  Eigen::MatrixXd d_value(1, m);
  Eigen::VectorXd d_log_std = Eigen::VectorXd::Zero(params.log_std.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t k = indices[static_cast<std::size_t>(i)];
    const double adv = advantages[k];
    const double logp = column_log_prob(a, mean, i, params.log_std);
    const double ratio = std::exp(logp - batch.log_probs[k]);
    const double clipped = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip);
    const double unclipped_obj = ratio * adv;
    const double clipped_obj = clipped * adv;
    parts.policy -= std::min(unclipped_obj, clipped_obj) * inv_m;
    parts.approx_kl += (batch.log_probs[k] - logp) * inv_m;
    if (std::abs(ratio - 1.0) > config.clip) parts.clip_fraction += inv_m;

    const double err = value(0, i) - batch.returns[k];
    parts.value += config.vf_coef * err * err * inv_m;

    if (grad) {
      // d(-min)/dlogp, nonzero only where the unclipped branch is selected
      const double g = unclipped_obj <= clipped_obj ? -adv * ratio * inv_m : 0.0;
      const Eigen::ArrayXd diff = (a.col(i) - mean.col(i)).array();
      d_mean.col(i) = (g * diff * inv_var).matrix();
      d_log_std.array() += g * (diff.square() * inv_var - 1.0);
      d_value(0, i) = 2.0 * config.vf_coef * err * inv_m;
    }
  }
  parts.entropy = gaussian_entropy(params.log_std);
  parts.total = parts.policy - config.ent_coef * parts.entropy + parts.value;

  if (grad) {
    params.policy.backward(policy_cache, d_mean, grad->policy);
    grad->log_std += d_log_std;
    grad->log_std.array() -= config.ent_coef;
    params.value.backward(value_cache, d_value, grad->value);
  }
  return parts;
}

std::vector<double> importance_ratios(const PolicyParams& params, const RolloutBatch& batch) {
  const Eigen::MatrixXd mean = params.policy.forward(batch.observations);
  std::vector<double> out(batch.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double logp =
        column_log_prob(batch.actions, mean, static_cast<Eigen::Index>(k), params.log_std);
    out[k] = std::exp(logp - batch.log_probs[k]);
  }
  return out;
}

AdamState AdamState::zeros_like(const PolicyParams& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

double clip_grad_norm(PolicyParams& grad, double max_norm) {
  double sq = 0.0;
  for (auto t : tensors(grad))
    for (double g : t) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / (norm + 1e-6);
    for (auto t : tensors(grad))
      for (double& g : t) g *= s;
  }
  return norm;
}

void adam_step(PolicyParams& params, const PolicyParams& grad, AdamState& adam,
               const PpoConfig& config) {
  ++adam.step;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam.step));
  auto p = tensors(params);
  auto g = tensors(grad);
  auto m = tensors(adam.m);
  auto v = tensors(adam.v);
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].size(); ++i) {
      m[t][i] = b1 * m[t][i] + (1.0 - b1) * g[t][i];
      v[t][i] = b2 * v[t][i] + (1.0 - b2) * g[t][i] * g[t][i];
      const double m_hat = m[t][i] / c1;
      const double v_hat = v[t][i] / c2;
      p[t][i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
  }
}

UpdateStats ppo_update(PolicyParams& params, AdamState& adam, const RolloutBatch& batch,
                       const PpoConfig& config, std::mt19937_64& rng) {
  config.validate();
  if (batch.advantages.size() != batch.size() || batch.returns.size() != batch.size())
    throw LengthMismatch("batch advantages or returns missing");
  const std::vector<double> adv = normalize(batch.advantages);
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto mb = static_cast<std::size_t>(config.minibatch_size);

  UpdateStats stats;
  PolicyParams grad = params.zeros_like();
  double loss_sum = 0.0;
  for (int epoch = 0; epoch < config.n_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start + mb <= order.size(); start += mb) {
      set_zero(grad);
      const std::span<const std::size_t> idx(order.data() + start, mb);
      const LossParts parts = ppo_loss(params, batch, idx, adv, config, &grad);
      if (!std::isfinite(parts.total)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", minibatch " << start / mb
            << ": policy=" << parts.policy << " value=" << parts.value
            << " entropy=" << parts.entropy << " approx_kl=" << parts.approx_kl;
        throw NonFiniteLoss(msg.str());
      }
      stats.grad_norm = clip_grad_norm(grad, config.max_grad_norm);
      adam_step(params, grad, adam, config);
      stats.last = parts;
      loss_sum += parts.total;
      ++stats.minibatches;
    }
  }
  stats.mean_loss = stats.minibatches ? loss_sum / stats.minibatches : 0.0;
  return stats;
}

VecEnv::VecEnv(const env::EpisodeConfig& config, int n_envs, std::uint64_t base_seed)
    : base_seed_(base_seed) {
  if (n_envs < 1) throw Error("VecEnv needs at least one environment");
  const auto n = static_cast<std::size_t>(n_envs);
  envs_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) envs_.emplace_back(config);
  obs_.resize(n);
  episode_index_.assign(n, 0);
  current_seed_.assign(n, 0);
  running_return_.assign(n, 0.0);
  running_length_.assign(n, 0);
  for (int i = 0; i < n_envs; ++i) reset_env(i);
}

std::uint64_t VecEnv::episode_seed(int env, std::uint64_t episode) const {
  return derive_seed(derive_seed(base_seed_, static_cast<std::uint64_t>(env)), episode);
}

void VecEnv::reset_env(int i) {
  const auto k = static_cast<std::size_t>(i);
  current_seed_[k] = episode_seed(i, episode_index_[k]);
  obs_[k] = envs_[k].reset(current_seed_[k]);
  running_return_[k] = 0.0;
  running_length_[k] = 0;
}

std::optional<EpisodeRecord> VecEnv::step(int i, std::span<const double> action,
                                          double& reward, bool& done) {
  const auto k = static_cast<std::size_t>(i);
  env::StepOutcome out = envs_[k].step(action);
  reward = out.reward;
  done = out.done;
  running_return_[k] += out.reward;
  ++running_length_[k];
  if (!out.done) {
    obs_[k] = std::move(out.observation);
    return std::nullopt;
  }
  EpisodeRecord rec;
  rec.env = i;
  rec.seed = current_seed_[k];
  rec.episode_return = running_return_[k];
  rec.length = running_length_[k];
  rec.terminal = out.info.terminal;
  ++episode_index_[k];
  reset_env(i);
  return rec;
}

Rollout collect_rollouts(const PolicyParams& params, VecEnv& envs, int n_steps,
                         std::mt19937_64& rng) {
  if (n_steps < 1) throw Error("n_steps must be positive");
  const int n_envs = envs.size();
  const auto obs_dim = static_cast<Eigen::Index>(envs.observations().front().size());
  const auto act_dim = static_cast<Eigen::Index>(params.log_std.size());
  if (obs_dim != params.policy.input_size())
    throw ShapeMismatch("environment observation size does not match the policy");
  if (act_dim != params.policy.output_size() || act_dim != static_cast<Eigen::Index>(envs.at(0).action_size()))
    throw ShapeMismatch("environment action size does not match the policy");

  Rollout out;
  RolloutBatch& b = out.batch;
  b.n_envs = n_envs;
  b.n_steps = n_steps;
  const std::size_t total = static_cast<std::size_t>(n_envs) * static_cast<std::size_t>(n_steps);
  b.observations.resize(obs_dim, static_cast<Eigen::Index>(total));
  b.actions.resize(act_dim, static_cast<Eigen::Index>(total));
  b.rewards.assign(total, 0.0);
  b.dones.assign(total, 0);
  b.values.assign(total, 0.0);
  b.log_probs.assign(total, 0.0);

  const Eigen::VectorXd std_dev = params.log_std.array().exp();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(obs_dim, n_envs);
  auto load_obs = [&] {
    for (int e = 0; e < n_envs; ++e)
      x.col(e) = Eigen::Map<const Eigen::VectorXd>(envs.observations()[static_cast<std::size_t>(e)].data(), obs_dim);
  };
  std::vector<double> raw(static_cast<std::size_t>(act_dim));
  std::vector<double> action(raw.size());
  for (int t = 0; t < n_steps; ++t) {
    load_obs();
    const Eigen::MatrixXd mean = params.policy.forward(x);
    const Eigen::MatrixXd value = params.value.forward(x);
    for (int e = 0; e < n_envs; ++e) {
      const std::size_t k = b.index(e, t);
      const auto col = static_cast<Eigen::Index>(k);
      for (Eigen::Index j = 0; j < act_dim; ++j) {
        raw[static_cast<std::size_t>(j)] = mean(j, e) + std_dev(j) * normal(rng);
        action[static_cast<std::size_t>(j)] = std::clamp(raw[static_cast<std::size_t>(j)], -1.0, 1.0);
      }
      b.observations.col(col) = x.col(e);
      b.actions.col(col) = Eigen::Map<const Eigen::VectorXd>(raw.data(), act_dim);
      b.values[k] = value(0, e);
      b.log_probs[k] = gaussian_log_prob(raw, mean.col(e), params.log_std);
      double reward = 0.0;
      bool done = false;
      if (auto rec = envs.step(e, action, reward, done)) {
        rec->env_steps = static_cast<std::int64_t>(t + 1) * n_envs;
        out.episodes.push_back(*rec);
      }
      b.rewards[k] = reward;
      b.dones[k] = done ? 1 : 0;
    }
  }
  load_obs();
  const Eigen::MatrixXd last = params.value.forward(x);
  b.bootstrap_values.assign(last.data(), last.data() + n_envs);
  return out;
}

TrainingState train(const PpoConfig& config, const env::EpisodeConfig& env_config,
                    std::optional<TrainingState> resume, const TrainHooks& hooks) {
  config.validate();
  env_config.validate();
  TrainingState state;
  if (resume) {
    state = std::move(*resume);
    if (state.params.dims() != dims_for(env_config))
      throw ShapeMismatch("resumed parameters do not match the environment");
  } else {
    state.params = init_params(dims_for(env_config), derive_seed(config.seed, 0));
    state.adam = AdamState::zeros_like(state.params);
  }
  // Offsets keep the env and sampling streams apart from the init stream.
  VecEnv envs(env_config, config.n_envs,
              derive_seed(config.seed, 1'000'000 + static_cast<std::uint64_t>(state.updates)));
  while (state.env_steps < config.total_steps) {
    std::mt19937_64 rng(derive_seed(config.seed, 2'000'000 + static_cast<std::uint64_t>(state.updates)));
    Rollout r = collect_rollouts(state.params, envs, config.n_steps, rng);
    compute_advantages(r.batch, config.gamma, config.gae_lambda);
    for (auto& e : r.episodes) {
      e.env_steps += state.env_steps;
      state.episodes.push_back(e);
    }
    const UpdateStats stats = ppo_update(state.params, state.adam, r.batch, config, rng);
    state.env_steps += config.batch_size();
    ++state.updates;
    if (hooks.on_update) hooks.on_update(state, stats);
  }
  return state;
}

std::vector<double> rolling_median(std::span<const double> values, int window) {
  if (window < 1) throw Error("rolling window must be positive");
  std::vector<double> out(values.size());
  std::vector<double> buf;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t first = i + 1 > static_cast<std::size_t>(window) ? i + 1 - static_cast<std::size_t>(window) : 0;
    buf.assign(values.begin() + static_cast<std::ptrdiff_t>(first),
               values.begin() + static_cast<std::ptrdiff_t>(i + 1));
    const std::size_t mid = buf.size() / 2;
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid), buf.end());
    const double upper = buf[mid];
    if (buf.size() % 2 == 1) {
      out[i] = upper;
    } else {
      const double lower = *std::max_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid));
      out[i] = 0.5 * (lower + upper);
    }
  }
  return out;
}

}  // namespace trajrl::policy
