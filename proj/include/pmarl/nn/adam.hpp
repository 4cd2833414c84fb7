#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pmarl/nn/mlp.hpp"

namespace pmarl::nn {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators for one parameter set. Shapes are fixed by the first
/// step and checked on every later one.
struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(AdamConfig cfg) : config(cfg) {}
};

/// One bias-corrected Adam update of every tensor in `params`.
/// Throws ConfigError on shape mismatch and NumericError (naming the tensor)
/// for a non-finite gradient or a non-finite updated parameter. Nothing is
/// written when an error is raised.
void adam_step(std::span<const ParamView> params, std::span<const GradView> grads, AdamState& state);

/// Scales all gradient tensors so their joint L2 norm is at most max_norm;
/// returns the pre-clip norm.
double clip_global_norm(std::span<const ParamView> grads_mut, double max_norm);

}  // namespace pmarl::nn
