#ifndef TRAJRL_PPO_H_
#define TRAJRL_PPO_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "trajrl/environment.h"
#include "trajrl/policy.h"

namespace trajrl::policy {

struct PpoConfig {
  int n_envs = 32;
  int n_steps = 64;
  int minibatch_size = 32;
  double gamma = 0.999;
  double learning_rate = 2e-4;
  double ent_coef = 0.01;
  double clip = 0.4;
  int n_epochs = 25;
  double gae_lambda = 0.99;
  std::int64_t total_steps = 2'000'000;
  double vf_coef = 1.0;
  double max_grad_norm = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int rolling_window = 1000;
  std::uint64_t seed = 0;

  int batch_size() const { return n_envs * n_steps; }
  void validate() const;
};

// Transitions are stored env-major: index = env * n_steps + t.
struct RolloutBatch {
  int n_envs = 0;
  int n_steps = 0;
  Eigen::MatrixXd observations;  // obs_dim x N
  Eigen::MatrixXd actions;       // act_dim x N, unclamped samples
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;  // episode ended with this transition
  std::vector<double> values;
  std::vector<double> log_probs;
  std::vector<double> bootstrap_values;  // V of the state after the last step, per env
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return rewards.size(); }
  std::size_t index(int env, int t) const {
    return static_cast<std::size_t>(env) * static_cast<std::size_t>(n_steps) +
           static_cast<std::size_t>(t);
  }
};

struct Gae {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// values has one more entry than rewards (bootstrap value of the final
// state). dones[t] marks that the episode ended at transition t.
Gae compute_gae(std::span<const double> rewards, std::span<const double> values,
                std::span<const std::uint8_t> dones, double gamma, double lambda);

// Fills advantages and returns of the batch, per environment.
void compute_advantages(RolloutBatch& batch, double gamma, double lambda);

// (x - mean) / (std + 1e-8) over the whole vector.
std::vector<double> normalize(std::span<const double> x);

struct LossParts {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Loss over the transitions in `indices` with the given (already
// normalized) advantages, indexed like the batch. Accumulates the gradient
// into grad when non-null.
LossParts ppo_loss(const PolicyParams& params, const RolloutBatch& batch,
                   std::span<const std::size_t> indices,
                   std::span<const double> advantages, const PpoConfig& config,
                   PolicyParams* grad = nullptr);

// pi(a|s) / pi_old(a|s) for every transition under params.
std::vector<double> importance_ratios(const PolicyParams& params, const RolloutBatch& batch);

struct AdamState {
  PolicyParams m;
  PolicyParams v;
  std::int64_t step = 0;

  static AdamState zeros_like(const PolicyParams& params);
};

// Scales grad so its global L2 norm is at most max_norm; returns the norm
// before clipping.
double clip_grad_norm(PolicyParams& grad, double max_norm);
void adam_step(PolicyParams& params, const PolicyParams& grad, AdamState& adam,
               const PpoConfig& config);

struct UpdateStats {
  LossParts last;          // final minibatch
  double mean_loss = 0.0;  // over all minibatches
  double grad_norm = 0.0;  // last minibatch, before clipping
  int minibatches = 0;
};

// n_epochs passes of shuffled minibatches over the batch. Advantages are
// normalized once per call. Throws NonFiniteLoss.
UpdateStats ppo_update(PolicyParams& params, AdamState& adam, const RolloutBatch& batch,
                       const PpoConfig& config, std::mt19937_64& rng);

struct EpisodeRecord {
  int env = 0;
  std::uint64_t seed = 0;
  double episode_return = 0.0;
  int length = 0;
  env::TerminalKind terminal = env::TerminalKind::kRunning;
  std::int64_t env_steps = 0;  // training steps when the episode ended
};

// Synchronized environments with automatic reset. Episode k of environment
// i uses seed derive_seed(derive_seed(base, i), k).
class VecEnv {
 public:
  VecEnv(const env::EpisodeConfig& config, int n_envs, std::uint64_t base_seed);

  int size() const { return static_cast<int>(envs_.size()); }
  const std::vector<std::vector<double>>& observations() const { return obs_; }
  env::Environment& at(int i) { return envs_[static_cast<std::size_t>(i)]; }
  std::uint64_t episode_seed(int env, std::uint64_t episode) const;

  // Steps environment i; resets it when the episode ends and returns the
  // finished record.
  std::optional<EpisodeRecord> step(int i, std::span<const double> action,
                                    double& reward, bool& done);

 private:
  void reset_env(int i);

  std::vector<env::Environment> envs_;
  std::vector<std::vector<double>> obs_;
  std::vector<std::uint64_t> episode_index_;
  std::vector<std::uint64_t> current_seed_;
  std::vector<double> running_return_;
  std::vector<int> running_length_;
  std::uint64_t base_seed_;
};

struct Rollout {
  RolloutBatch batch;
  std::vector<EpisodeRecord> episodes;  // finished during collection
};

Rollout collect_rollouts(const PolicyParams& params, VecEnv& envs, int n_steps,
                         std::mt19937_64& rng);

struct TrainingState {
  PolicyParams params;
  AdamState adam;
  std::int64_t env_steps = 0;
  int updates = 0;
  std::vector<EpisodeRecord> episodes;
};

struct TrainHooks {
  // Called after every update.
  std::function<void(const TrainingState&, const UpdateStats&)> on_update;
};

// Collect, GAE, update until total_steps environment steps. With a resume
// state, training continues from its counters; environments start fresh
// episodes seeded from the update count.
TrainingState train(const PpoConfig& config, const env::EpisodeConfig& env_config,
                    std::optional<TrainingState> resume = std::nullopt,
                    const TrainHooks& hooks = {});

// Median over the trailing window ending at each entry (shorter at the start).
std::vector<double> rolling_median(std::span<const double> values, int window);

}  // namespace trajrl::policy

#endif  // TRAJRL_PPO_H_
