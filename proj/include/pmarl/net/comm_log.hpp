#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pmarl/net/channel.hpp"

namespace pmarl::net {

/// Per-step communication record as CSV:
///
///     # pmarl-comm-log v1
///     step,mode_used,selected,dropped,priorities_raw,priorities_quantized
///
/// mode_used is priority | fallback | roundrobin; id and priority lists are
/// ';'-separated (selected ids ascending, priorities by agent id).
class CommLogWriter {
 public:
  CommLogWriter(std::ostream& out, int priority_levels);
  void record(std::int64_t step, CommMode mode, const Allocation& allocation, std::span<const int> dropped,
              std::span<const double> priorities);

 private:
  std::ostream& out_;
  int levels_;
};

/// Bandwidth accounting over a run.
struct BandwidthReport {
  std::int64_t steps = 0;
  std::int64_t messages_sent = 0;
  std::int64_t messages_dropped = 0;
  std::int64_t fallback_steps = 0;
  int n_agents = 0;
  int priority_bits = 0;
  CommMode mode = CommMode::Priority;

  void record(const Allocation& allocation, std::size_t n_dropped);

  std::int64_t bytes_sent() const { return messages_sent * static_cast<std::int64_t>(kPayloadBytes); }
  /// Every agent announces one quantized priority per step in priority mode.
  std::int64_t priority_bits_per_step() const;
  std::string to_json() const;
};

BandwidthReport make_bandwidth_report(const NetworkConfig& config);

}  // namespace pmarl::net
