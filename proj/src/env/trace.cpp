#include "pmarl/env/trace.hpp"

#include <ostream>

#include "pmarl/common/csv.hpp"

namespace pmarl::env {

TraceWriter::TraceWriter(std::ostream& out) : out_(out) {
  out_ << "# pmarl-env-trace v1\n";
  out_ << "step,agent,px,py,vx,vy,ax,ay,reward\n";
}

void TraceWriter::record(const WorldState& state, std::span<const Vec2> actions, double reward) {
  using csv::format;
  for (std::size_t i = 0; i < state.positions.size(); ++i) {
    const auto& p = state.positions[i];
    const auto& v = state.velocities[i];
    const auto& a = actions[i];
    out_ << state.step << ',' << i << ',' << format(p.x()) << ',' << format(p.y()) << ',' << format(v.x())
         << ',' << format(v.y()) << ',' << format(a.x()) << ',' << format(a.y()) << ',' << format(reward)
         << '\n';
  }
}

}  // namespace pmarl::env
