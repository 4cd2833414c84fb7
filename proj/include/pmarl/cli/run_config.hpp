#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pmarl/env/world.hpp"
#include "pmarl/net/channel.hpp"
#include "pmarl/train/train_config.hpp"

namespace pmarl::cli {

/// Everything needed to reproduce a run.
struct RunConfig {
  env::EnvConfig env;
  net::NetworkConfig network;
  train::TrainConfig train;
  std::string output_dir = "runs";
  std::string run_name = "run";
  std::vector<std::uint64_t> seeds{0};
  /// Write the per-step communication log during training (large).
  bool comm_log = false;

  /// Component validation plus cross-field checks; ConfigError names the field.
  void validate() const;
};

/// Parses the INI-style text format:
///
///     # comment
///     [run]      name, output_dir, seeds (comma list), comm_log
///     [env]      task, n_agents, n_landmarks, episode_length, dt, damping,
///                accel_gain, max_speed, world_half, landmark_half, noise_std,
///                formation_radius, angle_weight
///     [network]  mode, slots, loss_prob, delay_steps, priority_loss_prob,
///                priority_levels
///     [train]    gamma, gae_lambda, clip_eps, xi, rollout_length, epochs,
///                minibatch_size, actor_lr, critic_lr, total_steps,
///                entropy_coef, normalize_advantages, max_grad_norm,
///                hidden_sizes (comma list), init_log_std,
///                actor_output_scale, share_parameters, eval_interval,
///                eval_episodes, seed
///
/// Keys not listed keep their current value in `base`; unknown keys are
/// errors. Booleans are true/false.
RunConfig parse_run_config(std::istream& in, const std::string& source_name, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});

/// Applies "section.key=value". Throws ConfigError for unknown keys or
/// unparsable values.
void apply_override(RunConfig& config, const std::string& assignment);

/// Full snapshot in the same format; parse_run_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);

/// Names of every settable key, "section.key".
std::vector<std::string> config_keys();

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace pmarl::cli
