#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "pmarl/env/world.hpp"

namespace pmarl::env {

/// Streams an episode trace as CSV, one row per (step, agent):
///
///     # pmarl-env-trace v1
///     step,agent,px,py,vx,vy,ax,ay,reward
///
/// Rows carry the state after the step and the (unclipped) action applied.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out);
  void record(const WorldState& state, std::span<const Vec2> actions, double reward);

 private:
  std::ostream& out_;
};

}  // namespace pmarl::env
