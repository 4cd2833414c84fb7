#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pmarl/net/channel.hpp"

namespace pmarl::train {

/// Per-agent step reward: r_c - xi * a_p.
double combined_reward(double control_reward, double priority, double xi);
/// Round-robin agents learn control only and pay no communication penalty.
double combined_reward(double control_reward, double priority, double xi, net::CommMode mode);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> value_targets;
};

/// Backward recurrence A_t = delta_t + gamma*lambda*(1 - done_t)*A_{t+1},
/// delta_t = r_t + gamma*(1 - done_t)*V_{t+1} - V_t, with V_T = bootstrap.
/// done_t marks that the episode ended with step t. Targets are A_t + V_t.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma, double lambda);

}  // namespace pmarl::train
