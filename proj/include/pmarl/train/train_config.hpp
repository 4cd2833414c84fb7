#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace pmarl::train {

/// Hyperparameters of one training run. The algorithm leaves most of these
/// open, so the defaults are conventional PPO choices, not tuned values.
struct TrainConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  /// Weight of the communication penalty -xi * a_p.
  double xi = 0.05;
  int rollout_length = 2048;
  int epochs = 10;
  int minibatch_size = 256;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  std::int64_t total_steps = 1'000'000;
  double entropy_coef = 0.0;
  bool normalize_advantages = true;
  /// Global-norm gradient clip per network; <= 0 disables.
  double max_grad_norm = 0.5;
  std::vector<int> hidden_sizes{64, 64};
  double init_log_std = std::log(0.5);
  double actor_output_scale = 0.01;
  bool share_parameters = false;
  /// Evaluate every this many rollouts (and before the first, and after the last).
  int eval_interval = 10;
  int eval_episodes = 10;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

}  // namespace pmarl::train
