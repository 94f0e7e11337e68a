#include "trajrl/policy.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "trajrl/errors.h"

namespace trajrl::policy {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

Eigen::VectorXd as_column(std::span<const double> obs, int expected) {
  if (static_cast<int>(obs.size()) != expected)
    throw ShapeMismatch("observation has " + std::to_string(obs.size()) +
                        " entries, network expects " + std::to_string(expected));
  return Eigen::Map<const Eigen::VectorXd>(obs.data(), expected);
}

}  // namespace

PolicyDims dims_for(const env::EpisodeConfig& config) {
  PolicyDims d;
  d.observation = static_cast<int>(
      observation_size(config.lattice.lanes, config.lattice.sensor_layers));
  d.action = 2 * config.lattice.plan_layers;
  return d;
}

PolicyParams PolicyParams::zeros(const PolicyDims& dims) {
  PolicyParams p;
  p.policy = Mlp::zeros(layer_sizes(dims.observation, dims.hidden, dims.action));
  p.log_std = Eigen::VectorXd::Zero(dims.action);
  p.value = Mlp::zeros(layer_sizes(dims.observation, dims.hidden, 1));
  return p;
}

PolicyParams PolicyParams::zeros_like() const { return zeros(dims()); }

PolicyDims PolicyParams::dims() const {
  PolicyDims d;
  d.observation = policy.input_size();
  d.action = policy.output_size();
  const auto s = policy.sizes();
  d.hidden.assign(s.begin() + 1, s.end() - 1);
  return d;
}

std::size_t PolicyParams::size() const {
  return policy.parameter_count() + static_cast<std::size_t>(log_std.size()) +
         value.parameter_count();
}

std::vector<double> PolicyParams::flat() const {
  std::vector<double> out;
  out.reserve(size());
  policy.append_to(out);
  out.insert(out.end(), log_std.data(), log_std.data() + log_std.size());
  value.append_to(out);
  return out;
}

void PolicyParams::assign(std::span<const double> values) {
  if (values.size() != size()) throw ShapeMismatch("parameter vector has wrong length");
  std::size_t pos = policy.assign_from(values);
  std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(pos), log_std.size(),
              log_std.data());
  pos += static_cast<std::size_t>(log_std.size());
  value.assign_from(values.subspan(pos));
}

PolicyParams init_params(const PolicyDims& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PolicyParams p = PolicyParams::zeros(dims);
  orthogonal_init(p.policy, std::sqrt(2.0), 0.01, rng);
  orthogonal_init(p.value, std::sqrt(2.0), 1.0, rng);
  return p;
}

GaussianHead forward_policy(const PolicyParams& params, std::span<const double> obs) {
  const Eigen::VectorXd x = as_column(obs, params.policy.input_size());
  GaussianHead head;
  head.mean = params.policy.forward(x).col(0);
  head.std = params.log_std.array().exp();
  return head;
}

double forward_value(const PolicyParams& params, std::span<const double> obs) {
  const Eigen::VectorXd x = as_column(obs, params.value.input_size());
  return params.value.forward(x)(0, 0);
}

double gaussian_log_prob(std::span<const double> x, const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std) {
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double z = (x[static_cast<std::size_t>(i)] - mean(i)) / std::exp(log_std(i));
    lp += -0.5 * z * z - log_std(i) - kHalfLog2Pi;
  }
  return lp;
}

double gaussian_entropy(const Eigen::VectorXd& log_std) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < log_std.size(); ++i) h += 0.5 + kHalfLog2Pi + log_std(i);
  return h;
}

ActionSample sample_action(const GaussianHead& head, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSample s;
  const Eigen::Index d = head.mean.size();
  Eigen::VectorXd log_std(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double x = head.mean(i) + head.std(i) * normal(rng);
    s.raw.push_back(x);
    s.clamped.push_back(std::clamp(x, -1.0, 1.0));
    log_std(i) = std::log(head.std(i));
  }
  s.log_prob = gaussian_log_prob(s.raw, head.mean, log_std);
  return s;
}

std::vector<double> mean_action(const PolicyParams& params, std::span<const double> obs) {
  const GaussianHead head = forward_policy(params, obs);
  std::vector<double> a(static_cast<std::size_t>(head.mean.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = std::clamp(head.mean(static_cast<Eigen::Index>(i)), -1.0, 1.0);
  return a;
}

Trajectory plan_rl(const PolicyParams& params, const Scene& scene,
                   const LatticeConfig& lattice, const safety::SafetyConfig& safety) {
  const std::vector<double> obs = encode_observation(scene, lattice.v_max);
  const std::vector<double> action = mean_action(params, obs);
  const Trajectory proposal = env::decode_action(action, scene.n0, scene.v0, lattice);
  return safety::constrain(proposal, scene, lattice, safety).trajectory;
}

}  // namespace trajrl::policy
