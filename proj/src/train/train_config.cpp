#include "pmarl/train/train_config.hpp"

#include <string>

#include "pmarl/common/error.hpp"

namespace pmarl::train {

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(gamma > 0.0 && gamma < 1.0, "train.gamma must be in (0, 1)");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, "train.gae_lambda must be in [0, 1]");
  require(clip_eps > 0.0, "train.clip_eps must be > 0");
  require(xi > 0.0, "train.xi must be > 0");
  require(rollout_length >= 1, "train.rollout_length must be >= 1");
  require(epochs >= 1, "train.epochs must be >= 1");
  require(minibatch_size >= 1 && minibatch_size <= rollout_length, "train.minibatch_size must be in [1, rollout_length]");
  require(actor_lr > 0.0 && critic_lr > 0.0, "train.actor_lr and train.critic_lr must be > 0");
  require(total_steps >= 1, "train.total_steps must be >= 1");
  require(entropy_coef >= 0.0, "train.entropy_coef must be >= 0");
  require(!hidden_sizes.empty(), "train.hidden_sizes must list at least one layer");
  for (int h : hidden_sizes) require(h > 0, "train.hidden_sizes must be positive");
  require(std::isfinite(init_log_std), "train.init_log_std must be finite");
  require(actor_output_scale > 0.0, "train.actor_output_scale must be > 0");
  require(eval_interval >= 1, "train.eval_interval must be >= 1");
  require(eval_episodes >= 0, "train.eval_episodes must be >= 0");
}

}  // namespace pmarl::train
