#pragma once

#include <cstdint>
#include <vector>

#include "pmarl/nn/mlp.hpp"
#include "pmarl/nn/policy_head.hpp"

namespace pmarl::train {

/// One agent's trajectory segment. Columns / entries are indexed by the step
/// within the rollout.
struct RolloutBuffer {
  nn::Matrix observations;  ///< policy inputs (local obs ++ received obs)
  nn::Matrix controls;
  nn::Vector priorities;
  nn::Vector log_probs;
  nn::Vector values;
  std::vector<double> control_rewards;
  std::vector<double> penalties;  ///< xi * a_p, zero in round-robin mode
  std::vector<double> rewards;    ///< what the learner optimizes
  std::vector<std::uint8_t> dones;
  std::vector<double> advantages;
  std::vector<double> value_targets;

  RolloutBuffer() = default;
  RolloutBuffer(int obs_dim, int control_dims, int capacity);

  int capacity() const { return static_cast<int>(observations.cols()); }
};

}  // namespace pmarl::train
