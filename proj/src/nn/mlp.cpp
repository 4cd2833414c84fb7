#include "pmarl/nn/mlp.hpp"

#include <cmath>

#include "pmarl/common/error.hpp"

namespace pmarl::nn {

namespace {

// tanh(z) = 1 - 2 / (1 + exp(2z)); Eigen vectorizes exp for doubles but not
// tanh. Saturates correctly at +-inf, absolute error stays near 1 ulp.
template <typename Derived>
auto fast_tanh(const Eigen::ArrayBase<Derived>& z) {
  return 1.0 - 2.0 / (1.0 + (2.0 * z).exp());
}

}  // namespace

MlpGradients MlpGradients::zeros_like(const Mlp& mlp) {
  MlpGradients g;
  for (int k = 0; k < mlp.num_layers(); ++k) {
    g.weights.push_back(Matrix::Zero(mlp.weights()[k].rows(), mlp.weights()[k].cols()));
    g.biases.push_back(Vector::Zero(mlp.biases()[k].size()));
  }
  return g;
}

double MlpGradients::squared_norm() const {
  double total = 0.0;
  for (const auto& w : weights) total += w.squaredNorm();
  for (const auto& b : biases) total += b.squaredNorm();
  return total;
}

void MlpGradients::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
}

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] += other.weights[k];
    biases[k] += other.biases[k];
  }
  return *this;
}

std::vector<GradView> MlpGradients::views(const std::string& prefix) const {
  std::vector<GradView> out;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    out.push_back({prefix + "w" + std::to_string(k),
                   {weights[k].data(), static_cast<std::size_t>(weights[k].size())}});
    out.push_back({prefix + "b" + std::to_string(k),
                   {biases[k].data(), static_cast<std::size_t>(biases[k].size())}});
  }
  return out;
}

Mlp::Mlp(std::vector<int> layer_sizes) : layer_sizes_(std::move(layer_sizes)) {
  if (layer_sizes_.size() < 2) throw ConfigError("Mlp needs at least an input and an output size");
  for (int s : layer_sizes_) {
    if (s <= 0) throw ConfigError("Mlp layer sizes must be positive");
  }
  for (std::size_t k = 0; k + 1 < layer_sizes_.size(); ++k) {
    weights_.push_back(Matrix::Zero(layer_sizes_[k + 1], layer_sizes_[k]));
    biases_.push_back(Vector::Zero(layer_sizes_[k + 1]));
  }
}

Mlp Mlp::glorot(std::vector<int> layer_sizes, Rng& rng, double output_scale) {
  Mlp mlp(std::move(layer_sizes));
  for (int k = 0; k < mlp.num_layers(); ++k) {
    auto& w = mlp.weights_[k];
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major fill order so the draw sequence matches the checkpoint layout.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
    if (k == mlp.num_layers() - 1) w *= output_scale;
  }
  return mlp;
}

void Mlp::check_input(const Matrix& inputs) const {
  if (inputs.rows() != input_dim()) {
    throw ConfigError("Mlp input has " + std::to_string(inputs.rows()) + " rows, expected " +
                      std::to_string(input_dim()));
  }
  if (!inputs.allFinite()) throw InputError("Mlp input contains non-finite values");
}

Vector Mlp::forward(const Eigen::Ref<const Vector>& input) const {
  if (input.size() != input_dim()) {
    throw ConfigError("Mlp input has length " + std::to_string(input.size()) + ", expected " +
                      std::to_string(input_dim()));
  }
  if (!input.allFinite()) throw InputError("Mlp input contains non-finite values");
  Vector a = input;
  for (int k = 0; k < num_layers(); ++k) {
    Vector z = weights_[k] * a + biases_[k];
    a = (k + 1 < num_layers()) ? Vector(fast_tanh(z.array())) : z;
  }
  if (!a.allFinite()) throw NumericError("Mlp output is non-finite");
  return a;
}

Matrix Mlp::forward_batch(const Matrix& inputs) const {
  check_input(inputs);
  Matrix a = inputs;
  for (int k = 0; k < num_layers(); ++k) {
    Matrix z = weights_[k] * a;
    z.colwise() += biases_[k];
    a = (k + 1 < num_layers()) ? Matrix(fast_tanh(z.array())) : std::move(z);
  }
  if (!a.allFinite()) throw NumericError("Mlp output is non-finite");
  return a;
}

MlpActivations Mlp::forward_cached(const Matrix& inputs) const {
  check_input(inputs);
  MlpActivations cache;
  cache.layers.reserve(weights_.size() + 1);
  cache.layers.push_back(inputs);
  for (int k = 0; k < num_layers(); ++k) {
    Matrix z = weights_[k] * cache.layers.back();
    z.colwise() += biases_[k];
    if (k + 1 < num_layers()) z = fast_tanh(z.array()).matrix();
    if (!z.allFinite()) {
      throw NumericError("Mlp activation of layer " + std::to_string(k) + " is non-finite");
    }
    cache.layers.push_back(std::move(z));
  }
  return cache;
}

MlpGradients Mlp::backward(const MlpActivations& cache, const Matrix& output_grad) const {
  if (static_cast<int>(cache.layers.size()) != num_layers() + 1) {
    throw ConfigError("activation cache does not match the network depth");
  }
  if (output_grad.rows() != output_dim() || output_grad.cols() != cache.output().cols()) {
    throw ConfigError("output gradient shape does not match the cached output");
  }
  MlpGradients grads;
  grads.weights.resize(weights_.size());
  grads.biases.resize(biases_.size());

  Matrix delta = output_grad;
  for (int k = num_layers() - 1; k >= 0; --k) {
    if (k + 1 < num_layers()) {
      // tanh'(z) = 1 - tanh(z)^2, evaluated from the cached activation
      const auto& act = cache.layers[k + 1];
      delta = (delta.array() * (1.0 - act.array().square())).matrix();
    }
    if (!delta.allFinite()) {
      throw NumericError("Mlp backward pass is non-finite at layer " + std::to_string(k));
    }
    grads.weights[k].noalias() = delta * cache.layers[k].transpose();
    grads.biases[k] = delta.rowwise().sum();
    if (k > 0) delta = weights_[k].transpose() * delta;
  }
  return grads;
}

std::vector<ParamView> Mlp::parameters(const std::string& prefix) {
  std::vector<ParamView> out;
  for (int k = 0; k < num_layers(); ++k) {
    out.push_back({prefix + "w" + std::to_string(k),
                   {weights_[k].data(), static_cast<std::size_t>(weights_[k].size())}});
    out.push_back({prefix + "b" + std::to_string(k),
                   {biases_[k].data(), static_cast<std::size_t>(biases_[k].size())}});
  }
  return out;
}

bool Mlp::all_finite() const {
  for (const auto& w : weights_) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases_) {
    if (!b.allFinite()) return false;
  }
  return true;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (int k = 0; k < num_layers(); ++k) {
    n += static_cast<std::size_t>(weights_[k].size() + biases_[k].size());
  }
  return n;
}

}  // namespace pmarl::nn
