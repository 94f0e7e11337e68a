#ifndef TRAJRL_POLICY_H_
#define TRAJRL_POLICY_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "trajrl/environment.h"
#include "trajrl/lattice.h"
#include "trajrl/mlp.h"
#include "trajrl/safety.h"
#include "trajrl/scene.h"

namespace trajrl::policy {

struct PolicyDims {
  int observation = 0;
  int action = 0;
  std::vector<int> hidden = {64, 64};

  friend bool operator==(const PolicyDims&, const PolicyDims&) = default;
};

PolicyDims dims_for(const env::EpisodeConfig& config);

// Gaussian policy with a state-independent learnable log standard deviation,
// and a separate value network. No parameters are shared.
struct PolicyParams {
  Mlp policy;               // observation -> action mean
  Eigen::VectorXd log_std;  // one per action dimension
  Mlp value;                // observation -> scalar

  static PolicyParams zeros(const PolicyDims& dims);
  PolicyParams zeros_like() const;
  PolicyDims dims() const;
  std::size_t size() const;

  // policy layers, log_std, value layers
  std::vector<double> flat() const;
  void assign(std::span<const double> values);
};

// Orthogonal hidden weights (gain sqrt 2), policy head gain 0.01, value head
// gain 1, zero biases, log_std 0.
PolicyParams init_params(const PolicyDims& dims, std::uint64_t seed);

struct GaussianHead {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

// Throws ShapeMismatch if the observation length is wrong.
GaussianHead forward_policy(const PolicyParams& params, std::span<const double> obs);
double forward_value(const PolicyParams& params, std::span<const double> obs);

double gaussian_log_prob(std::span<const double> x, const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& log_std);
double gaussian_entropy(const Eigen::VectorXd& log_std);

struct ActionSample {
  std::vector<double> raw;      // unclamped Gaussian draw (log_prob refers to it)
  std::vector<double> clamped;  // executed action in [-1, 1]
  double log_prob = 0.0;
};

ActionSample sample_action(const GaussianHead& head, std::mt19937_64& rng);

// Deterministic action (mean), clamped to [-1, 1].
std::vector<double> mean_action(const PolicyParams& params, std::span<const double> obs);

// Mean action decoded from the scene's ego state and passed through the
// safety constraint. Propagates NoPathException.
Trajectory plan_rl(const PolicyParams& params, const Scene& scene,
                   const LatticeConfig& lattice, const safety::SafetyConfig& safety);

}  // namespace trajrl::policy

#endif  // TRAJRL_POLICY_H_
