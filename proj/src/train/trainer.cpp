#include "pmarl/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "pmarl/common/csv.hpp"
#include "pmarl/common/error.hpp"
#include "pmarl/train/gae.hpp"
#include "pmarl/train/losses.hpp"

namespace pmarl::train {

namespace {

constexpr int kControlDims = 2;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream ids for derive_seed.
constexpr std::uint64_t kEnvStream = 1;
constexpr std::uint64_t kChannelStream = 2;
constexpr std::uint64_t kEvalStream = 7;
constexpr std::uint64_t kPolicyStream = 100;
constexpr std::uint64_t kMinibatchStream = 1000;
constexpr std::uint64_t kInitStream = 2000;

std::vector<int> layer_sizes(int input, const std::vector<int>& hidden, int output) {
  std::vector<int> sizes{input};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  return sizes;
}

std::vector<nn::ParamView> mutable_views(nn::MlpGradients& g) {
  std::vector<nn::ParamView> out;
  for (std::size_t k = 0; k < g.weights.size(); ++k) {
    out.push_back({"w" + std::to_string(k), {g.weights[k].data(), static_cast<std::size_t>(g.weights[k].size())}});
    out.push_back({"b" + std::to_string(k), {g.biases[k].data(), static_cast<std::size_t>(g.biases[k].size())}});
  }
  return out;
}

std::vector<nn::GradView> as_grads(const std::vector<nn::ParamView>& views) {
  std::vector<nn::GradView> out;
  for (const auto& v : views) out.push_back({v.name, v.values});
  return out;
}

nn::Vector concat(const nn::Vector& a, const nn::Vector& b) {
  nn::Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

// Moves received-observation column block j to block perm[j]; columns before
// `offset` (the local observation) are left alone.
nn::Matrix permute_comm_columns(const nn::Matrix& m, int offset, std::span<const int> perm) {
  nn::Matrix out = m;
  for (std::size_t j = 0; j < perm.size(); ++j) {
    out.middleCols(offset + net::kPayloadLength * perm[j], net::kPayloadLength) =
        m.middleCols(offset + net::kPayloadLength * static_cast<int>(j), net::kPayloadLength);
  }
  return out;
}

void permute_first_layer(nn::Mlp& mlp, nn::AdamState& opt, int offset, std::span<const int> perm) {
  auto& w = mlp.weights()[0];
  const auto rows = w.rows();
  const auto cols = w.cols();
  w = permute_comm_columns(w, offset, perm);
  // Tensor 0 of the optimizer state is w0 in Eigen's (column-major) storage order.
  for (auto* moments : {&opt.first_moment, &opt.second_moment}) {
    if (moments->empty()) continue;
    Eigen::Map<nn::Matrix> view((*moments)[0].data(), rows, cols);
    view = permute_comm_columns(nn::Matrix(view), offset, perm);
  }
}

double mean_or_nan(double sum, std::size_t n) { return n ? sum / static_cast<double>(n) : kNaN; }

}  // namespace

RolloutBuffer::RolloutBuffer(int obs_dim, int control_dims, int capacity)
    : observations(obs_dim, capacity),
      controls(control_dims, capacity),
      priorities(capacity),
      log_probs(capacity),
      values(capacity),
      control_rewards(capacity),
      penalties(capacity),
      rewards(capacity),
      dones(capacity),
      advantages(capacity),
      value_targets(capacity) {}

Trainer::Trainer(env::EnvConfig env_config, net::NetworkConfig net_config, TrainConfig train_config)
    : env_config_(env_config),
      net_config_(net_config),
      train_config_(std::move(train_config)),
      scope_(net_config.mode == net::CommMode::Priority ? nn::ActionScope::ControlAndPriority
                                                        : nn::ActionScope::ControlOnly),
      env_(env_config),
      env_rng_(make_rng(train_config_.seed, kEnvStream)),
      channel_(net_config, derive_seed(train_config_.seed, kChannelStream)) {
  train_config_.validate();
  if (net_config_.n_agents != env_config_.n_agents) {
    throw ConfigError("network.n_agents (" + std::to_string(net_config_.n_agents) + ") must equal env.n_agents (" +
                      std::to_string(env_config_.n_agents) + ")");
  }
  const int n = n_agents();
  const int input = policy_input_dim();
  for (int i = 0; i < n; ++i) policy_rngs_.push_back(make_rng(train_config_.seed, kPolicyStream + i));

  const int n_learners = train_config_.share_parameters ? 1 : n;
  for (int k = 0; k < n_learners; ++k) {
    Rng init = make_rng(train_config_.seed, kInitStream + k);
    Learner l;
    l.actor = nn::Mlp::glorot(layer_sizes(input, train_config_.hidden_sizes, kControlDims + 1), init,
                              train_config_.actor_output_scale);
    l.head = nn::GaussianPolicyHead(kControlDims, train_config_.init_log_std);
    l.critic = nn::Mlp::glorot(layer_sizes(input, train_config_.hidden_sizes, 1), init);
    l.actor_opt = nn::AdamState(nn::AdamConfig{.learning_rate = train_config_.actor_lr});
    l.critic_opt = nn::AdamState(nn::AdamConfig{.learning_rate = train_config_.critic_lr});
    l.minibatch_rng = make_rng(train_config_.seed, kMinibatchStream + k);
    learners_.push_back(std::move(l));
  }
  for (int i = 0; i < n; ++i) buffers_.emplace_back(input, kControlDims, train_config_.rollout_length);
  bandwidth_ = net::make_bandwidth_report(net_config_);
  start_episode();
}

int Trainer::policy_input_dim() const { return env_config_.obs_dim() + net::kPayloadLength * n_agents(); }

void Trainer::start_episode() {
  local_obs_ = env_.reset(env_rng_);
  channel_.clear_in_flight();
  refresh_policy_inputs({});
  episode_control_ = 0.0;
  episode_priority_.assign(n_agents(), 0.0);
}

void Trainer::refresh_policy_inputs(const std::vector<net::Message>& delivered) {
  policy_inputs_.resize(n_agents());
  for (int i = 0; i < n_agents(); ++i) {
    policy_inputs_[i] = concat(local_obs_[i], net::assemble_comm_obs(delivered, i, n_agents()));
  }
}

void Trainer::set_comm_log(std::ostream* out) {
  if (out) {
    comm_log_.emplace(*out, net_config_.priority_levels);
  } else {
    comm_log_.reset();
  }
}

void Trainer::collect_rollout() {
  const int n = n_agents();
  const int horizon = train_config_.rollout_length;
  const bool priority_mode = net_config_.mode == net::CommMode::Priority;
  std::vector<env::Vec2> controls(n);
  std::vector<double> priorities(n);
  std::vector<net::Payload> payloads;

  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      const Learner& l = learners_[learner_of(i)];
      const nn::Vector& x = policy_inputs_[i];
      const nn::Vector mean = l.actor.forward(x);
      const nn::ActionSample s = l.head.sample(mean, policy_rngs_[i], scope_);
      RolloutBuffer& b = buffers_[i];
      b.observations.col(t) = x;
      b.controls.col(t) = s.action.control;
      b.priorities[t] = s.action.priority;
      b.log_probs[t] = s.log_prob;
      b.values[t] = l.critic.forward(x)[0];
      controls[i] = env::Vec2(s.action.control[0], s.action.control[1]);
      priorities[i] = s.action.priority;
    }

    const env::StepResult result = env_.step(controls, env_rng_);
    local_obs_ = result.observations;
    const std::int64_t acted_at = env_steps_++;

    // The granted agents broadcast the state they sensed after this step.
    const net::Allocation alloc = channel_.allocate_slots(priorities);
    payloads.clear();
    for (int id : alloc.selected) payloads.push_back(env::broadcast_payload(env_.state(), id));
    const std::vector<int> dropped = channel_.transmit(env_steps_, alloc.selected, payloads);
    bandwidth_.record(alloc, dropped.size());
    if (comm_log_) comm_log_->record(acted_at, net_config_.mode, alloc, dropped, priorities);

    episode_control_ += result.reward;
    for (int i = 0; i < n; ++i) {
      RolloutBuffer& b = buffers_[i];
      b.control_rewards[t] = result.reward;
      b.penalties[t] = priority_mode ? train_config_.xi * priorities[i] : 0.0;
      b.rewards[t] = combined_reward(result.reward, priorities[i], train_config_.xi, net_config_.mode);
      b.dones[t] = result.done ? 1 : 0;
      episode_priority_[i] += priorities[i];
    }

    if (result.done) {
      for (int i = 0; i < n; ++i) {
        EpisodeRecord rec;
        rec.episode = episode_index_;
        rec.end_step = env_steps_;
        rec.agent = i;
        rec.control_reward = episode_control_;
        rec.priority_sum = episode_priority_[i];
        rec.episode_reward =
            priority_mode ? episode_control_ - train_config_.xi * episode_priority_[i] : episode_control_;
        finished_.push_back(rec);
      }
      ++episode_index_;
      start_episode();
    } else {
      refresh_policy_inputs(channel_.deliver(env_steps_));
    }
  }

  for (int i = 0; i < n; ++i) {
    RolloutBuffer& b = buffers_[i];
    const double bootstrap = learners_[learner_of(i)].critic.forward(policy_inputs_[i])[0];
    GaeResult g = compute_gae(b.rewards, std::span<const double>(b.values.data(), b.values.size()), b.dones,
                              bootstrap, train_config_.gamma, train_config_.gae_lambda);
    b.advantages = std::move(g.advantages);
    b.value_targets = std::move(g.value_targets);
  }
}

UpdateStats Trainer::update() {
  const TrainConfig& cfg = train_config_;
  const int horizon = cfg.rollout_length;
  UpdateStats stats;
  double actor_sum = 0.0, critic_sum = 0.0, entropy_sum = 0.0, clip_sum = 0.0;
  int minibatches = 0;
  bool first = true;

  for (std::size_t k = 0; k < learners_.size(); ++k) {
    Learner& l = learners_[k];
    std::vector<int> agents;
    if (cfg.share_parameters) {
      agents.resize(n_agents());
      std::iota(agents.begin(), agents.end(), 0);
    } else {
      agents.push_back(static_cast<int>(k));
    }

    const int total = horizon * static_cast<int>(agents.size());
    const int input = policy_input_dim();
    nn::Matrix obs(input, total), controls(kControlDims, total);
    nn::Vector prios(total), logp(total), values(total), adv(total), targets(total);
    for (std::size_t a = 0; a < agents.size(); ++a) {
      const RolloutBuffer& b = buffers_[agents[a]];
      const int off = static_cast<int>(a) * horizon;
      obs.middleCols(off, horizon) = b.observations;
      controls.middleCols(off, horizon) = b.controls;
      prios.segment(off, horizon) = b.priorities;
      logp.segment(off, horizon) = b.log_probs;
      values.segment(off, horizon) = b.values;
      adv.segment(off, horizon) = Eigen::Map<const nn::Vector>(b.advantages.data(), horizon);
      targets.segment(off, horizon) = Eigen::Map<const nn::Vector>(b.value_targets.data(), horizon);
    }

    std::vector<int> order(total);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), l.minibatch_rng);
      for (int start = 0; start < total; start += cfg.minibatch_size) {
        const int size = std::min(cfg.minibatch_size, total - start);
        PolicyBatch pb;
        ValueBatch vb;
        pb.observations.resize(input, size);
        pb.controls.resize(kControlDims, size);
        pb.priorities.resize(size);
        pb.old_log_probs.resize(size);
        pb.advantages.resize(size);
        vb.old_values.resize(size);
        vb.targets.resize(size);
        for (int j = 0; j < size; ++j) {
          const int s = order[start + j];
          pb.observations.col(j) = obs.col(s);
          pb.controls.col(j) = controls.col(s);
          pb.priorities[j] = prios[s];
          pb.old_log_probs[j] = logp[s];
          pb.advantages[j] = adv[s];
          vb.old_values[j] = values[s];
          vb.targets[j] = targets[s];
        }
        if (cfg.normalize_advantages && size > 1) normalize_advantages(pb.advantages);

        ActorLoss al = actor_loss(l.actor, l.head, pb, cfg.clip_eps, cfg.entropy_coef, scope_);
        if (first) {
          stats.first_minibatch_ratio_deviation = (al.ratios.array() - 1.0).abs().maxCoeff();
          first = false;
        }
        auto actor_params = l.actor.parameters("actor.");
        actor_params.push_back({"log_std", {l.head.log_std_mut().data(), static_cast<std::size_t>(l.head.output_dim())}});
        auto actor_grads = mutable_views(al.actor_grads);
        actor_grads.push_back({"log_std", {al.log_std_grad.data(), static_cast<std::size_t>(al.log_std_grad.size())}});
        nn::clip_global_norm(actor_grads, cfg.max_grad_norm);
        nn::adam_step(actor_params, as_grads(actor_grads), l.actor_opt);
        l.head.clamp_log_std();

        vb.observations = std::move(pb.observations);
        CriticLoss cl = critic_loss(l.critic, vb, cfg.clip_eps);
        auto critic_grads = mutable_views(cl.grads);
        nn::clip_global_norm(critic_grads, cfg.max_grad_norm);
        nn::adam_step(l.critic.parameters("critic."), as_grads(critic_grads), l.critic_opt);

        actor_sum += al.loss;
        critic_sum += cl.loss;
        entropy_sum += al.entropy;
        clip_sum += al.clip_fraction;
        ++minibatches;
      }
    }
  }
  if (minibatches) {
    stats.actor_loss = actor_sum / minibatches;
    stats.critic_loss = critic_sum / minibatches;
    stats.entropy = entropy_sum / minibatches;
    stats.clip_fraction = clip_sum / minibatches;
  }
  return stats;
}

std::vector<EpisodeRecord> Trainer::take_finished_episodes() { return std::exchange(finished_, {}); }

EvalReport Trainer::evaluate(int n_episodes, std::uint64_t seed) const {
  return evaluate_policies(env_config_, net_config_, learners_, train_config_.xi, n_episodes, seed);
}

EvalReport evaluate_policies(const env::EnvConfig& env_config, const net::NetworkConfig& net_config,
                             const std::vector<Learner>& learners, double xi, int n_episodes, std::uint64_t seed) {
  EvalReport report;
  report.episodes = std::max(n_episodes, 0);
  if (report.episodes == 0) {
    report.mean_control_reward = kNaN;
    report.mean_penalty = kNaN;
    return report;
  }
  const int n = env_config.n_agents;
  if (learners.empty()) throw ConfigError("evaluate: no learners");
  const bool shared = learners.size() == 1;
  if (!shared && static_cast<int>(learners.size()) != n) throw ConfigError("evaluate: learner count mismatch");
  const bool priority_mode = net_config.mode == net::CommMode::Priority;

  env::Environment env(env_config);
  Rng env_rng = make_rng(seed, kEnvStream);
  net::Channel channel(net_config, derive_seed(seed, kChannelStream));
  std::vector<env::Vec2> controls(n);
  std::vector<double> priorities(n);
  std::vector<nn::Vector> inputs(n);
  double control_total = 0.0, penalty_total = 0.0;

  for (int ep = 0; ep < report.episodes; ++ep) {
    env::JointObservation local = env.reset(env_rng);
    channel.clear_in_flight();
    std::vector<net::Message> delivered;
    double episode_control = 0.0;
    std::vector<double> priority_sum(n, 0.0);
    for (int step = 0; !env.done(); ++step) {
      for (int i = 0; i < n; ++i) {
        const Learner& l = learners[shared ? 0 : i];
        inputs[i] = concat(local[i], net::assemble_comm_obs(delivered, i, n));
        const nn::AgentAction a = l.head.mean_action(l.actor.forward(inputs[i]));
        controls[i] = env::Vec2(a.control[0], a.control[1]);
        priorities[i] = a.priority;
        priority_sum[i] += a.priority;
      }
      const env::StepResult result = env.step(controls, env_rng);
      local = result.observations;
      episode_control += result.reward;

      const net::Allocation alloc = channel.allocate_slots(priorities);
      std::vector<net::Payload> payloads;
      for (int id : alloc.selected) payloads.push_back(env::broadcast_payload(env.state(), id));
      const std::vector<int> dropped = channel.transmit(step + 1, alloc.selected, payloads);
      delivered = channel.deliver(step + 1);

      EvalStep rec;
      rec.episode = ep;
      rec.step = step;
      rec.fallback = alloc.fallback;
      rec.selected = alloc.sorted_ids();
      rec.dropped = dropped;
      std::sort(rec.dropped.begin(), rec.dropped.end());
      rec.priorities = priorities;
      rec.control_reward = result.reward;
      report.trace.push_back(std::move(rec));
    }
    report.episode_control_rewards.push_back(episode_control);
    control_total += episode_control;
    if (priority_mode) {
      for (double p : priority_sum) penalty_total += xi * p / n;
    }
  }
  report.mean_control_reward = control_total / report.episodes;
  report.mean_penalty = penalty_total / report.episodes;
  return report;
}

nn::Checkpoint Trainer::checkpoint() const {
  nn::Checkpoint ckpt;
  for (std::size_t k = 0; k < learners_.size(); ++k) {
    const std::string prefix = "learner" + std::to_string(k) + ".";
    ckpt.add(prefix + "actor", learners_[k].actor);
    ckpt.add(prefix + "log_std", learners_[k].head.log_std());
    ckpt.add(prefix + "critic", learners_[k].critic);
  }
  return ckpt;
}

void Trainer::load_checkpoint(const nn::Checkpoint& ckpt) {
  std::size_t actors = 0;
  for (const auto& [name, value] : ckpt.entries()) {
    if (name.ends_with(".actor")) ++actors;
  }
  if (actors != learners_.size()) {
    throw ConfigError("checkpoint holds " + std::to_string(actors) + " learners, configuration expects " +
                      std::to_string(learners_.size()));
  }
  std::vector<Learner> next = learners_;
  for (std::size_t k = 0; k < next.size(); ++k) {
    const std::string prefix = "learner" + std::to_string(k) + ".";
    const nn::Mlp& actor = ckpt.mlp(prefix + "actor");
    const nn::Mlp& critic = ckpt.mlp(prefix + "critic");
    const nn::Vector& log_std = ckpt.vector(prefix + "log_std");
    if (actor.layer_sizes() != next[k].actor.layer_sizes() || critic.layer_sizes() != next[k].critic.layer_sizes()) {
      throw ConfigError("checkpoint network shapes do not match the configuration (learner " + std::to_string(k) +
                        ")");
    }
    next[k].actor = actor;
    next[k].critic = critic;
    next[k].head.set_log_std(log_std);
  }
  learners_ = std::move(next);
}

void Trainer::permute_agents(std::span<const int> perm) {
  const int n = n_agents();
  if (static_cast<int>(perm.size()) != n) throw InputError("permute_agents: permutation length mismatch");
  std::vector<bool> hit(n, false);
  for (int p : perm) {
    if (p < 0 || p >= n || hit[p]) throw InputError("permute_agents: not a permutation");
    hit[p] = true;
  }
  if (channel_.in_flight() != 0) throw InputError("permute_agents: messages are in flight");

  auto apply = [&](auto& items) {
    auto old = items;
    for (int i = 0; i < n; ++i) items[perm[i]] = std::move(old[i]);
  };
  env::WorldState& s = env_.mutable_state();
  apply(s.positions);
  apply(s.velocities);
  local_obs_ = env_.observe_all();
  apply(policy_rngs_);
  apply(episode_priority_);
  apply(policy_inputs_);
  const int offset = env_config_.obs_dim();
  for (auto& x : policy_inputs_) {
    nn::Matrix row = x.transpose();
    x = permute_comm_columns(row, offset, perm).transpose();
  }
  if (!train_config_.share_parameters) apply(learners_);
  for (auto& l : learners_) {
    permute_first_layer(l.actor, l.actor_opt, offset, perm);
    permute_first_layer(l.critic, l.critic_opt, offset, perm);
  }
}

MetricsWriter::MetricsWriter(std::ostream& out, const std::string& label, int n_agents) : out_(out) {
  out_ << "# pmarl-metrics v1 " << label << '\n';
  out_ << "rollout,env_steps,episodes,episode_reward,control_reward,penalty";
  for (int i = 0; i < n_agents; ++i) out_ << ",priority_" << i;
  out_ << ",actor_loss,critic_loss,entropy,eval_control_reward\n";
}

void MetricsWriter::write(const MetricsRow& row) {
  using csv::format;
  out_ << row.rollout << ',' << row.env_steps << ',' << row.episodes << ',' << format(row.episode_reward) << ','
       << format(row.control_reward) << ',' << format(row.penalty);
  for (double p : row.mean_priority) out_ << ',' << format(p);
  out_ << ',' << format(row.actor_loss) << ',' << format(row.critic_loss) << ',' << format(row.entropy) << ','
       << format(row.eval_control_reward) << '\n';
}

EpisodeLogWriter::EpisodeLogWriter(std::ostream& out, double xi, net::CommMode mode) : out_(out) {
  out_ << "# pmarl-episodes v1 xi=" << csv::format(xi) << " mode=" << net::to_string(mode) << '\n';
  out_ << "episode,end_step,agent,control_reward,priority_sum,episode_reward\n";
}

void EpisodeLogWriter::write(const EpisodeRecord& r) {
  out_ << r.episode << ',' << r.end_step << ',' << r.agent << ',' << csv::format(r.control_reward) << ','
       << csv::format(r.priority_sum) << ',' << csv::format(r.episode_reward) << '\n';
}

void write_eval_trace(std::ostream& out, const EvalReport& report, int n_agents, net::CommMode mode) {
  out << "# pmarl-eval-trace v1\n";
  out << "episode,step,mode_used,selected,dropped,control_reward";
  for (int i = 0; i < n_agents; ++i) out << ",priority_" << i;
  out << '\n';
  for (const EvalStep& s : report.trace) {
    const char* used = mode == net::CommMode::RoundRobin ? "roundrobin" : (s.fallback ? "fallback" : "priority");
    out << s.episode << ',' << s.step << ',' << used << ',' << csv::join_ids(s.selected) << ','
        << csv::join_ids(s.dropped) << ',' << csv::format(s.control_reward);
    for (double p : s.priorities) out << ',' << csv::format(p);
    out << '\n';
  }
}

TrainSummary run_training(Trainer& trainer, const TrainSinks& sinks) {
  const TrainConfig& cfg = trainer.train_config();
  const int n = trainer.n_agents();
  std::optional<MetricsWriter> metrics;
  std::optional<EpisodeLogWriter> episodes;
  if (sinks.metrics) metrics.emplace(*sinks.metrics, sinks.label, n);
  if (sinks.episodes) episodes.emplace(*sinks.episodes, cfg.xi, trainer.net_config().mode);
  trainer.set_comm_log(sinks.comm_log);

  const std::uint64_t eval_seed = derive_seed(cfg.seed, kEvalStream);
  TrainSummary summary;
  summary.initial_eval = trainer.evaluate(cfg.eval_episodes, eval_seed);

  MetricsRow row0;
  row0.episode_reward = row0.control_reward = row0.penalty = kNaN;
  row0.mean_priority.assign(n, kNaN);
  row0.actor_loss = row0.critic_loss = row0.entropy = kNaN;
  row0.eval_control_reward = summary.initial_eval.mean_control_reward;
  if (metrics) metrics->write(row0);
  if (sinks.on_rollout) sinks.on_rollout(row0);

  const std::int64_t horizon = cfg.rollout_length;
  const int n_rollouts = static_cast<int>((cfg.total_steps + horizon - 1) / horizon);
  for (int r = 1; r <= n_rollouts; ++r) {
    UpdateStats stats;
    try {
      trainer.collect_rollout();
      stats = trainer.update();
    } catch (const NumericError& e) {
      throw NumericError("rollout " + std::to_string(r) + ", env step " + std::to_string(trainer.env_steps()) + ": " +
                         e.what());
    }

    MetricsRow row;
    row.rollout = r;
    row.env_steps = trainer.env_steps();
    const auto finished = trainer.take_finished_episodes();
    double reward_sum = 0.0, control_sum = 0.0, penalty_sum = 0.0;
    for (const EpisodeRecord& e : finished) {
      if (episodes) episodes->write(e);
      reward_sum += e.episode_reward;
      control_sum += e.control_reward;
      penalty_sum += e.control_reward - e.episode_reward;
    }
    row.episodes = static_cast<int>(finished.size() / n);
    row.episode_reward = mean_or_nan(reward_sum, finished.size());
    row.control_reward = mean_or_nan(control_sum, finished.size());
    row.penalty = mean_or_nan(penalty_sum, finished.size());
    for (const RolloutBuffer& b : trainer.buffers()) row.mean_priority.push_back(b.priorities.mean());
    row.actor_loss = stats.actor_loss;
    row.critic_loss = stats.critic_loss;
    row.entropy = stats.entropy;
    row.eval_control_reward = kNaN;
    if (r % cfg.eval_interval == 0 || r == n_rollouts) {
      EvalReport eval = trainer.evaluate(cfg.eval_episodes, eval_seed);
      row.eval_control_reward = eval.mean_control_reward;
      if (r == n_rollouts) summary.final_eval = std::move(eval);
    }
    if (metrics) metrics->write(row);
    if (sinks.on_rollout) sinks.on_rollout(row);
    summary.rollouts = r;
  }
  trainer.set_comm_log(nullptr);
  return summary;
}

}  // namespace pmarl::train
