#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "pmarl/common/rng.hpp"

namespace pmarl::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A named, mutable flat view of one parameter tensor (row/column order is
/// the tensor's storage order; only the element count matters to Adam).
struct ParamView {
  std::string name;
  std::span<double> values;
};

struct GradView {
  std::string name;
  std::span<const double> values;
};

class Mlp;

/// Gradients with the same shapes as the parameters of an Mlp.
struct MlpGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static MlpGradients zeros_like(const Mlp& mlp);

  double squared_norm() const;
  void scale(double factor);
  MlpGradients& operator+=(const MlpGradients& other);
  std::vector<GradView> views(const std::string& prefix = "") const;
};

/// Post-activation outputs of every layer for one batch; layers[0] is the
/// input batch and layers.back() is the network output. Columns are samples.
struct MlpActivations {
  std::vector<Matrix> layers;
  const Matrix& output() const { return layers.back(); }
};

/// Fully connected network: tanh on hidden layers, identity on the output.
/// weights[k] is (layer_sizes[k+1] x layer_sizes[k]).
class Mlp {
 public:
  Mlp() = default;
  /// Zero-initialized network. Throws ConfigError for fewer than two sizes or
  /// a non-positive size.
  explicit Mlp(std::vector<int> layer_sizes);

  /// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases; the
  /// last layer's weights are multiplied by output_scale.
  static Mlp glorot(std::vector<int> layer_sizes, Rng& rng, double output_scale = 1.0);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int input_dim() const { return layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.back(); }
  int num_layers() const { return static_cast<int>(weights_.size()); }

  std::vector<Matrix>& weights() { return weights_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  std::vector<Vector>& biases() { return biases_; }
  const std::vector<Vector>& biases() const { return biases_; }

  Vector forward(const Eigen::Ref<const Vector>& input) const;
  /// Batched forward, one sample per column.
  Matrix forward_batch(const Matrix& inputs) const;
  MlpActivations forward_cached(const Matrix& inputs) const;

  /// Gradient of a scalar loss w.r.t. every weight and bias, given
  /// dLoss/dOutput for each sample (same shape as the cached output).
  /// Throws NumericError naming the layer when an intermediate is non-finite.
  MlpGradients backward(const MlpActivations& cache, const Matrix& output_grad) const;

  std::vector<ParamView> parameters(const std::string& prefix = "");

  bool all_finite() const;
  std::size_t parameter_count() const;

 private:
  void check_input(const Matrix& inputs) const;

  std::vector<int> layer_sizes_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

}  // namespace pmarl::nn
