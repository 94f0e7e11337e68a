#ifndef TRAJRL_MLP_H_
#define TRAJRL_MLP_H_

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace trajrl::policy {

// Fully connected network with tanh hidden layers and a linear output.
// Batches are column-major: one sample per column.
struct Mlp {
  std::vector<Eigen::MatrixXd> weights;  // layer k: out x in
  std::vector<Eigen::VectorXd> biases;

  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  };

  static Mlp zeros(std::span<const int> sizes);
  Mlp zeros_like() const;

  int input_size() const { return static_cast<int>(weights.front().cols()); }
  int output_size() const { return static_cast<int>(weights.back().rows()); }
  std::size_t parameter_count() const;
  std::vector<int> sizes() const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;
  // Accumulates dL/dparams into grad given dL/doutput for the cached batch.
  void backward(const Cache& cache, const Eigen::MatrixXd& d_output, Mlp& grad) const;

  // Parameters in declared order: for each layer, W (column-major) then b.
  void append_to(std::vector<double>& out) const;
  std::size_t assign_from(std::span<const double> in);

  void scale(double factor);
  void add_scaled(const Mlp& other, double factor);
  double squared_norm() const;
};

// Orthogonal rows/columns scaled by `gain` for each hidden layer and by
// `output_gain` for the last layer; zero biases.
void orthogonal_init(Mlp& net, double gain, double output_gain, std::mt19937_64& rng);

}  // namespace trajrl::policy

#endif  // TRAJRL_MLP_H_
