#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmarl/env/world.hpp"
#include "pmarl/net/channel.hpp"
#include "pmarl/net/comm_log.hpp"
#include "pmarl/nn/adam.hpp"
#include "pmarl/nn/checkpoint.hpp"
#include "pmarl/nn/mlp.hpp"
#include "pmarl/nn/policy_head.hpp"
#include "pmarl/train/rollout_buffer.hpp"
#include "pmarl/train/train_config.hpp"

namespace pmarl::train {

/// Actor, critic and optimizer state of one independent learner.
struct Learner {
  nn::Mlp actor;
  nn::GaussianPolicyHead head;
  nn::Mlp critic;
  nn::AdamState actor_opt;
  nn::AdamState critic_opt;
  Rng minibatch_rng;
};

/// Episode totals for one agent.
struct EpisodeRecord {
  std::int64_t episode = 0;
  std::int64_t end_step = 0;
  int agent = 0;
  double control_reward = 0.0;
  double priority_sum = 0.0;
  /// control_reward - xi * priority_sum in priority mode, control_reward otherwise.
  double episode_reward = 0.0;
};

struct UpdateStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  /// max |ratio - 1| over the first minibatch of the first epoch.
  double first_minibatch_ratio_deviation = 0.0;
};

struct EvalStep {
  int episode = 0;
  int step = 0;
  bool fallback = false;
  std::vector<int> selected;
  std::vector<int> dropped;
  std::vector<double> priorities;
  double control_reward = 0.0;
};

struct EvalReport {
  int episodes = 0;
  double mean_control_reward = 0.0;
  /// Mean over agents of xi * sum of priorities per episode (0 in round-robin).
  double mean_penalty = 0.0;
  std::vector<double> episode_control_rewards;
  std::vector<EvalStep> trace;
};

/// Deterministic-action evaluation episodes on fresh environment/channel
/// streams derived from `seed`. Priorities still drive slot allocation.
EvalReport evaluate_policies(const env::EnvConfig& env_config, const net::NetworkConfig& net_config,
                             const std::vector<Learner>& learners, double xi, int n_episodes, std::uint64_t seed);

struct MetricsRow {
  int rollout = 0;
  std::int64_t env_steps = 0;
  int episodes = 0;
  double episode_reward = 0.0;
  double control_reward = 0.0;
  double penalty = 0.0;
  std::vector<double> mean_priority;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double eval_control_reward = 0.0;
};

/// Control-priority independent PPO: every agent owns an actor (control +
/// priority head) and a critic, sees its local observation plus whatever
/// broadcasts reached it, and is updated only from its own trajectory.
class Trainer {
 public:
  Trainer(env::EnvConfig env_config, net::NetworkConfig net_config, TrainConfig train_config);

  const env::EnvConfig& env_config() const { return env_config_; }
  const net::NetworkConfig& net_config() const { return net_config_; }
  const TrainConfig& train_config() const { return train_config_; }

  int n_agents() const { return env_config_.n_agents; }
  /// Actor/critic input length: local observation + 4 values per agent.
  int policy_input_dim() const;
  std::int64_t env_steps() const { return env_steps_; }

  const std::vector<Learner>& learners() const { return learners_; }
  std::vector<Learner>& learners() { return learners_; }
  int learner_of(int agent) const { return train_config_.share_parameters ? 0 : agent; }

  const std::vector<RolloutBuffer>& buffers() const { return buffers_; }
  const env::Environment& environment() const { return env_; }

  /// Runs rollout_length joint steps, filling every agent's buffer, then
  /// computes advantages and value targets.
  void collect_rollout();
  /// K epochs of minibatch PPO updates for every learner.
  UpdateStats update();

  /// Episodes finished since the last call.
  std::vector<EpisodeRecord> take_finished_episodes();

  /// Optional sinks; the caller keeps the streams alive.
  void set_comm_log(std::ostream* out);
  const net::BandwidthReport& bandwidth() const { return bandwidth_; }

  EvalReport evaluate(int n_episodes, std::uint64_t seed) const;

  nn::Checkpoint checkpoint() const;
  /// Throws ConfigError when learner count or network shapes do not match.
  void load_checkpoint(const nn::Checkpoint& ckpt);

  /// Relabels agents: old agent i becomes perm[i] in the environment, the
  /// received-observation layout, learners and per-agent random streams.
  /// Only valid while nothing is in flight (e.g. right after construction).
  void permute_agents(std::span<const int> perm);

 private:
  void start_episode();
  void refresh_policy_inputs(const std::vector<net::Message>& delivered);

  env::EnvConfig env_config_;
  net::NetworkConfig net_config_;
  TrainConfig train_config_;
  nn::ActionScope scope_;

  env::Environment env_;
  Rng env_rng_;
  net::Channel channel_;
  std::vector<Rng> policy_rngs_;
  std::vector<Learner> learners_;
  std::vector<RolloutBuffer> buffers_;

  env::JointObservation local_obs_;
  std::vector<nn::Vector> policy_inputs_;
  std::int64_t env_steps_ = 0;
  std::int64_t episode_index_ = 0;
  double episode_control_ = 0.0;
  std::vector<double> episode_priority_;
  std::vector<EpisodeRecord> finished_;

  std::optional<net::CommLogWriter> comm_log_;
  net::BandwidthReport bandwidth_;
};

/// Writes the per-rollout metrics CSV:
///
///     # pmarl-metrics v1 <label>
///     rollout,env_steps,episodes,episode_reward,control_reward,penalty,
///     priority_0..priority_{N-1},actor_loss,critic_loss,entropy,eval_control_reward
///
/// Row 0 holds only the pre-training evaluation; "nan" marks absent values.
class MetricsWriter {
 public:
  MetricsWriter(std::ostream& out, const std::string& label, int n_agents);
  void write(const MetricsRow& row);

 private:
  std::ostream& out_;
};

/// Per-agent episode totals CSV:
///
///     # pmarl-episodes v1 xi=<xi> mode=<mode>
///     episode,end_step,agent,control_reward,priority_sum,episode_reward
class EpisodeLogWriter {
 public:
  EpisodeLogWriter(std::ostream& out, double xi, net::CommMode mode);
  void write(const EpisodeRecord& record);

 private:
  std::ostream& out_;
};

/// Evaluation trace CSV, one row per step:
///
///     # pmarl-eval-trace v1
///     episode,step,mode_used,selected,dropped,control_reward,priority_0..priority_{N-1}
void write_eval_trace(std::ostream& out, const EvalReport& report, int n_agents, net::CommMode mode);

struct TrainSinks {
  std::ostream* metrics = nullptr;
  std::ostream* episodes = nullptr;
  std::ostream* comm_log = nullptr;
  std::string label;
  std::function<void(const MetricsRow&)> on_rollout;
};

struct TrainSummary {
  int rollouts = 0;
  EvalReport initial_eval;
  EvalReport final_eval;
};

/// Full loop until total_steps: evaluation before training, then
/// rollout/update cycles with periodic and final evaluation.
TrainSummary run_training(Trainer& trainer, const TrainSinks& sinks);

}  // namespace pmarl::train
