#include "pmarl/net/comm_log.hpp"

#include <algorithm>
#include <json.hpp>
#include <ostream>

#include "pmarl/common/csv.hpp"

namespace pmarl::net {

CommLogWriter::CommLogWriter(std::ostream& out, int priority_levels) : out_(out), levels_(priority_levels) {
  out_ << "# pmarl-comm-log v1\n";
  out_ << "step,mode_used,selected,dropped,priorities_raw,priorities_quantized\n";
}

void CommLogWriter::record(std::int64_t step, CommMode mode, const Allocation& allocation,
                           std::span<const int> dropped, std::span<const double> priorities) {
  const char* used = mode == CommMode::RoundRobin ? "roundrobin" : (allocation.fallback ? "fallback" : "priority");
  std::vector<int> drop_ids(dropped.begin(), dropped.end());
  std::sort(drop_ids.begin(), drop_ids.end());
  std::string raw, quant;
  for (std::size_t i = 0; i < priorities.size(); ++i) {
    if (i) {
      raw += ';';
      quant += ';';
    }
    raw += csv::format(priorities[i]);
    quant += std::to_string(quantize_priority(priorities[i], levels_));
  }
  out_ << step << ',' << used << ',' << csv::join_ids(allocation.sorted_ids()) << ',' << csv::join_ids(drop_ids)
       << ',' << raw << ',' << quant << '\n';
}

void BandwidthReport::record(const Allocation& allocation, std::size_t n_dropped) {
  ++steps;
  messages_sent += static_cast<std::int64_t>(allocation.selected.size());
  messages_dropped += static_cast<std::int64_t>(n_dropped);
  if (allocation.fallback) ++fallback_steps;
}

std::int64_t BandwidthReport::priority_bits_per_step() const {
  return mode == CommMode::Priority ? static_cast<std::int64_t>(n_agents) * priority_bits : 0;
}

std::string BandwidthReport::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = to_string(mode);
  j["steps"] = steps;
  j["messages_sent"] = messages_sent;
  j["messages_dropped"] = messages_dropped;
  j["message_bytes"] = kPayloadBytes;
  j["bytes_sent"] = bytes_sent();
  j["fallback_steps"] = fallback_steps;
  j["priority_bits_per_agent"] = mode == CommMode::Priority ? priority_bits : 0;
  j["priority_bits_per_step"] = priority_bits_per_step();
  return j.dump(2);
}

BandwidthReport make_bandwidth_report(const NetworkConfig& config) {
  BandwidthReport r;
  r.n_agents = config.n_agents;
  r.priority_bits = priority_wire_size(config.priority_levels);
  r.mode = config.mode;
  return r;
}

}  // namespace pmarl::net
