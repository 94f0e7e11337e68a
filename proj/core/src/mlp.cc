#include "trajrl/mlp.h"

#include <algorithm>

namespace trajrl::policy {

Mlp Mlp::zeros(std::span<const int> sizes) {
  Mlp net;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    net.weights.push_back(Eigen::MatrixXd::Zero(sizes[k + 1], sizes[k]));
    net.biases.push_back(Eigen::VectorXd::Zero(sizes[k + 1]));
  }
  return net;
}

Mlp Mlp::zeros_like() const {
  const auto s = sizes();
  return zeros(s);
}

std::vector<int> Mlp::sizes() const {
  std::vector<int> s{input_size()};
  for (const auto& w : weights) s.push_back(static_cast<int>(w.rows()));
  return s;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    n += static_cast<std::size_t>(weights[k].size() + biases[k].size());
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
  if (cache) cache->inputs.clear();
  Eigen::MatrixXd a = x;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (cache) cache->inputs.push_back(a);
    Eigen::MatrixXd z = weights[k] * a;
    z.colwise() += biases[k];
    a = k + 1 < weights.size() ? Eigen::MatrixXd(z.array().tanh()) : z;
  }
  return a;
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& d_output, Mlp& grad) const {
  Eigen::MatrixXd delta = d_output;  // dL/dz of the current layer
  for (std::size_t k = weights.size(); k-- > 0;) {
    const Eigen::MatrixXd& input = cache.inputs[k];
    grad.weights[k].noalias() += delta * input.transpose();
    grad.biases[k] += delta.rowwise().sum();
    if (k == 0) break;
    // input = tanh(z_{k-1}), so dtanh = 1 - input^2.
    Eigen::MatrixXd d_input = weights[k].transpose() * delta;
    delta = d_input.array() * (1.0 - input.array().square());
  }
}

void Mlp::append_to(std::vector<double>& out) const {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    out.insert(out.end(), weights[k].data(), weights[k].data() + weights[k].size());
    out.insert(out.end(), biases[k].data(), biases[k].data() + biases[k].size());
  }
}

std::size_t Mlp::assign_from(std::span<const double> in) {
  std::size_t pos = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(pos), weights[k].size(),
                weights[k].data());
    pos += static_cast<std::size_t>(weights[k].size());
    std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(pos), biases[k].size(),
                biases[k].data());
    pos += static_cast<std::size_t>(biases[k].size());
  }
  return pos;
}

void Mlp::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
}

void Mlp::add_scaled(const Mlp& other, double factor) {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] += factor * other.weights[k];
    biases[k] += factor * other.biases[k];
  }
}

double Mlp::squared_norm() const {
  double s = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    s += weights[k].squaredNorm() + biases[k].squaredNorm();
  return s;
}

void orthogonal_init(Mlp& net, double gain, double output_gain, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    Eigen::MatrixXd& w = net.weights[k];
    const Eigen::Index rows = w.rows(), cols = w.cols();
    const Eigen::Index big = std::max(rows, cols), small = std::min(rows, cols);
    Eigen::MatrixXd g(big, small);
    for (Eigen::Index j = 0; j < small; ++j)
      for (Eigen::Index i = 0; i < big; ++i) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
    // Fix the sign ambiguity of QR so the result is Haar distributed.
    const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < small; ++j)
      if (r(j, j) < 0) q.col(j) *= -1.0;
    const double scale = k + 1 < net.weights.size() ? gain : output_gain;
    w = scale * (rows >= cols ? q : Eigen::MatrixXd(q.transpose()));
    net.biases[k].setZero();
  }
}

}  // namespace trajrl::policy
