#include "pmarl/train/gae.hpp"

#include "pmarl/common/error.hpp"

namespace pmarl::train {

double combined_reward(double control_reward, double priority, double xi) { return control_reward - xi * priority; }

double combined_reward(double control_reward, double priority, double xi, net::CommMode mode) {
  return mode == net::CommMode::Priority ? combined_reward(control_reward, priority, xi) : control_reward;
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw ConfigError("compute_gae: array lengths differ");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.value_targets.assign(n, 0.0);
  double next_value = bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * live * next_value - values[k];
    const double adv = delta + gamma * lambda * live * next_adv;
    out.advantages[k] = adv;
    out.value_targets[k] = adv + values[k];
    next_value = values[k];
    next_adv = adv;
  }
  return out;
}

}  // namespace pmarl::train
