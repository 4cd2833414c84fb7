#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pmarl/common/rng.hpp"

namespace pmarl::net {

enum class CommMode { Priority, RoundRobin };

std::string to_string(CommMode mode);
/// "priority" | "roundrobin"; ConfigError otherwise.
CommMode parse_mode(const std::string& name);

struct NetworkConfig {
  int n_agents = 3;
  /// Observation broadcast slots per step (L < N).
  int slots = 1;
  /// Per-broadcast drop probability; a drop hides the message from everyone.
  double loss_prob = 0.2;
  int delay_steps = 1;
  CommMode mode = CommMode::Priority;
  /// Probability that a whole priority-exchange round is lost, in which case
  /// the step falls back to round-robin.
  double priority_loss_prob = 0.2;
  /// Quantization levels used when reporting priority wire overhead.
  int priority_levels = 8;

  void validate() const;
};

inline constexpr int kPayloadLength = 4;
inline constexpr std::size_t kPayloadBytes = 16;

using Payload = std::array<double, kPayloadLength>;
using WirePayload = std::array<std::byte, kPayloadBytes>;

/// Four little-endian IEEE-754 binary32 values.
WirePayload serialize_payload(const Payload& values);
Payload deserialize_payload(const WirePayload& bytes);

struct Message {
  int sender = 0;
  WirePayload payload{};
  std::int64_t send_step = 0;

  Payload values() const { return deserialize_payload(payload); }
};

struct Allocation {
  /// Granted agents in grant order: descending priority in priority mode,
  /// cyclic order in round-robin. Always exactly L entries.
  std::vector<int> selected;
  /// True when the priority exchange was lost and round-robin was used.
  bool fallback = false;

  std::vector<int> sorted_ids() const;
};

/// Shared broadcast medium with top-L slot allocation, Bernoulli message
/// loss and a fixed delivery delay.
class Channel {
 public:
  Channel(NetworkConfig config, std::uint64_t seed);

  const NetworkConfig& config() const { return config_; }

  /// Priority mode: with probability priority_loss_prob the exchange is lost
  /// and the round-robin allocation is returned (cursor advances); otherwise
  /// the L highest priorities win, ties to the lower id. Round-robin mode
  /// ignores `priorities`. Throws InputError for a priority outside (0, 1)
  /// in priority mode or a wrong vector length.
  Allocation allocate_slots(std::span<const double> priorities);

  /// Broadcasts one payload per selected agent at step `now`; each survives
  /// an independent Bernoulli(1 - loss_prob) draw and is queued for
  /// delivery at now + delay_steps. Returns the ids that were dropped.
  std::vector<int> transmit(std::int64_t now, std::span<const int> selected, std::span<const Payload> payloads);

  /// Removes and returns the messages due at `now`, ordered by sender id.
  /// Anything overdue (due before `now`) is discarded.
  std::vector<Message> deliver(std::int64_t now);

  /// Drops every in-flight message (episode boundary).
  void clear_in_flight() { in_flight_.clear(); }

  int cursor() const { return cursor_; }
  std::size_t in_flight() const { return in_flight_.size(); }

 private:
  std::vector<int> round_robin();

  struct Pending {
    Message message;
    std::int64_t deliver_step;
  };

  NetworkConfig config_;
  Rng rng_;
  int cursor_ = 0;
  std::vector<Pending> in_flight_;
};

/// Fixed-id layout of received broadcasts: slot j (4 values) holds sender
/// j's payload, zero when j did not get through or j == receiver. Throws
/// ProtocolError for a duplicate sender and InputError for an out-of-range one.
Eigen::VectorXd assemble_comm_obs(std::span<const Message> delivered, int receiver, int n_agents);

/// Bits needed to encode one of n_levels priority levels: ceil(log2(n)).
int priority_wire_size(int n_levels);

/// Uniform-bin quantization of p in (0, 1) to [0, n_levels).
int quantize_priority(double priority, int n_levels);

}  // namespace pmarl::net
