#include "pmarl/cli/presets.hpp"

#include "pmarl/common/error.hpp"

namespace pmarl::cli {

namespace {

// PPO settings used by every preset: shorter rollouts and a faster critic
// than the library defaults, which learn too slowly at desk-scale budgets.
void tuned_training(train::TrainConfig& t) {
  t.rollout_length = 1000;
  t.minibatch_size = 100;
  t.epochs = 5;
  t.actor_lr = 3e-4;
  t.critic_lr = 3e-3;
  t.gamma = 0.8;
  t.eval_interval = 10;
  t.eval_episodes = 10;
}

ExperimentPreset coverage(std::string name, std::int64_t steps, std::string description) {
  ExperimentPreset p;
  p.name = std::move(name);
  p.description = std::move(description);
  RunConfig& c = p.base;
  c.env.task = env::Task::Coverage;
  c.env.n_agents = 3;
  c.env.n_landmarks = 3;
  c.network.n_agents = 3;
  tuned_training(c.train);
  c.train.total_steps = steps;
  c.seeds = {0, 1, 2};
  p.priority_slots = 1;
  p.roundrobin_slots = 1;
  return p;
}

ExperimentPreset formation(std::string name, std::int64_t steps, std::string description) {
  ExperimentPreset p;
  p.name = std::move(name);
  p.description = std::move(description);
  RunConfig& c = p.base;
  c.env.task = env::Task::Formation;
  c.env.n_agents = 8;
  c.env.n_landmarks = 1;
  c.network.n_agents = 8;
  tuned_training(c.train);
  c.train.total_steps = steps;
  c.seeds = {0, 1, 2};
  p.priority_slots = 1;
  p.roundrobin_slots = 2;
  return p;
}

}  // namespace

const std::vector<ExperimentPreset>& presets() {
  static const std::vector<ExperimentPreset> all = {
      coverage("coverage-n3", 10'000'000, "coverage, 3 agents, 3 landmarks, 1 slot, 10M steps"),
      coverage("coverage-n3-desk", 200'000, "coverage, 3 agents, 3 landmarks, 1 slot, 200k steps"),
      formation("formation-n8", 10'000'000, "formation, 8 agents, 1 priority slot / 2 round-robin slots, 10M steps"),
      formation("formation-n8-desk", 500'000,
                "formation, 8 agents, 1 priority slot / 2 round-robin slots, 500k steps"),
  };
  return all;
}

const ExperimentPreset* find_preset(const std::string& name) {
  for (const ExperimentPreset& p : presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::string preset_names() {
  std::string out;
  for (const ExperimentPreset& p : presets()) {
    if (!out.empty()) out += ", ";
    out += p.name;
  }
  return out;
}

RunConfig expand_preset(const std::string& name, std::optional<net::CommMode> mode) {
  const ExperimentPreset* p = find_preset(name);
  if (!p) throw ConfigError("unknown preset '" + name + "' (available: " + preset_names() + ")");
  RunConfig c = p->base;
  c.network.mode = mode.value_or(net::CommMode::Priority);
  c.network.slots = c.network.mode == net::CommMode::Priority ? p->priority_slots : p->roundrobin_slots;
  c.run_name = p->name + "-" + net::to_string(c.network.mode);
  return c;
}

}  // namespace pmarl::cli
