#include "pmarl/net/channel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "pmarl/common/error.hpp"

namespace pmarl::net {

std::string to_string(CommMode mode) { return mode == CommMode::Priority ? "priority" : "roundrobin"; }

CommMode parse_mode(const std::string& name) {
  if (name == "priority") return CommMode::Priority;
  if (name == "roundrobin" || name == "round-robin") return CommMode::RoundRobin;
  throw ConfigError("network.mode: unknown mode '" + name + "' (expected priority|roundrobin)");
}

void NetworkConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(n_agents >= 2, "network.n_agents must be >= 2");
  require(slots >= 1 && slots < n_agents, "network.slots must satisfy 1 <= L < N");
  require(loss_prob >= 0.0 && loss_prob < 1.0, "network.loss_prob must be in [0, 1)");
  require(priority_loss_prob >= 0.0 && priority_loss_prob < 1.0, "network.priority_loss_prob must be in [0, 1)");
  require(delay_steps >= 0, "network.delay_steps must be >= 0");
  require(priority_levels >= 2, "network.priority_levels must be >= 2");
}

WirePayload serialize_payload(const Payload& values) {
  WirePayload out{};
  for (int k = 0; k < kPayloadLength; ++k) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[k]));
    for (int b = 0; b < 4; ++b) out[4 * k + b] = static_cast<std::byte>((bits >> (8 * b)) & 0xFFu);
  }
  return out;
}

Payload deserialize_payload(const WirePayload& bytes) {
  Payload out{};
  for (int k = 0; k < kPayloadLength; ++k) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * k + b]) << (8 * b);
    out[k] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return out;
}

std::vector<int> Allocation::sorted_ids() const {
  std::vector<int> ids = selected;
  std::sort(ids.begin(), ids.end());
  return ids;
}

Channel::Channel(NetworkConfig config, std::uint64_t seed) : config_(config), rng_(seed) { config_.validate(); }

std::vector<int> Channel::round_robin() {
  std::vector<int> ids;
  ids.reserve(config_.slots);
  for (int k = 0; k < config_.slots; ++k) ids.push_back((cursor_ + k) % config_.n_agents);
  cursor_ = (cursor_ + config_.slots) % config_.n_agents;
  return ids;
}

Allocation Channel::allocate_slots(std::span<const double> priorities) {
  Allocation out;
  if (config_.mode == CommMode::RoundRobin) {
    out.selected = round_robin();
    return out;
  }
  if (static_cast<int>(priorities.size()) != config_.n_agents) {
    throw InputError("allocate_slots: expected " + std::to_string(config_.n_agents) + " priorities");
  }
  for (std::size_t i = 0; i < priorities.size(); ++i) {
    if (!(priorities[i] > 0.0 && priorities[i] < 1.0)) {
      throw InputError("allocate_slots: priority of agent " + std::to_string(i) + " outside (0, 1)");
    }
  }
  if (uniform01(rng_) < config_.priority_loss_prob) {
    out.selected = round_robin();
    out.fallback = true;
    return out;
  }
  std::vector<int> order(config_.n_agents);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return priorities[a] > priorities[b]; });
  out.selected.assign(order.begin(), order.begin() + config_.slots);
  return out;
}

std::vector<int> Channel::transmit(std::int64_t now, std::span<const int> selected,
                                   std::span<const Payload> payloads) {
  if (selected.size() != payloads.size()) throw InputError("transmit: one payload per selected agent required");
  std::vector<int> dropped;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    const int sender = selected[k];
    if (sender < 0 || sender >= config_.n_agents) throw InputError("transmit: sender id out of range");
    for (double v : payloads[k]) {
      if (!std::isfinite(v)) throw InputError("transmit: non-finite payload");
    }
    if (uniform01(rng_) < config_.loss_prob) {
      dropped.push_back(sender);
      continue;
    }
    in_flight_.push_back({Message{sender, serialize_payload(payloads[k]), now}, now + config_.delay_steps});
  }
  return dropped;
}

std::vector<Message> Channel::deliver(std::int64_t now) {
  std::vector<Message> due;
  std::vector<Pending> keep;
  keep.reserve(in_flight_.size());
  for (auto& p : in_flight_) {
    if (p.deliver_step == now) {
      due.push_back(p.message);
    } else if (p.deliver_step > now) {
      keep.push_back(std::move(p));
    }
  }
  in_flight_ = std::move(keep);
  std::stable_sort(due.begin(), due.end(), [](const Message& a, const Message& b) { return a.sender < b.sender; });
  return due;
}

Eigen::VectorXd assemble_comm_obs(std::span<const Message> delivered, int receiver, int n_agents) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kPayloadLength) * n_agents);
  std::vector<bool> seen(n_agents, false);
  for (const Message& m : delivered) {
    if (m.sender < 0 || m.sender >= n_agents) {
      throw InputError("assemble_comm_obs: sender " + std::to_string(m.sender) + " out of range");
    }
    if (seen[m.sender]) {
      throw ProtocolError("assemble_comm_obs: duplicate message from sender " + std::to_string(m.sender));
    }
    seen[m.sender] = true;
    if (m.sender == receiver) continue;
    const Payload v = m.values();
    for (int k = 0; k < kPayloadLength; ++k) out[kPayloadLength * m.sender + k] = v[k];
  }
  return out;
}

int priority_wire_size(int n_levels) {
  if (n_levels < 2) throw InputError("priority_wire_size: need at least two levels");
  return std::bit_width(static_cast<unsigned>(n_levels - 1));
}

int quantize_priority(double priority, int n_levels) {
  if (n_levels < 2) throw InputError("quantize_priority: need at least two levels");
  const int level = static_cast<int>(std::floor(priority * n_levels));
  return std::clamp(level, 0, n_levels - 1);
}

}  // namespace pmarl::net
