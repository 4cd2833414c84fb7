#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "pmarl/common/error.hpp"
#include "pmarl/net/channel.hpp"
#include "pmarl/net/comm_log.hpp"

using namespace pmarl;
using namespace pmarl::net;

namespace {

NetworkConfig lossless(int n, int slots, CommMode mode = CommMode::Priority) {
  NetworkConfig c;
  c.n_agents = n;
  c.slots = slots;
  c.mode = mode;
  c.loss_prob = 0.0;
  c.priority_loss_prob = 0.0;
  return c;
}

Payload payload_of(int i) { return {double(i), double(i) + 0.5, -double(i), 0.25}; }

TEST_CASE("top-L selection and tie rule") {
  Channel ch(lossless(3, 1), 0);
  const std::vector<double> p1{0.3, 0.9, 0.1};
  CHECK(ch.allocate_slots(p1).selected == std::vector<int>{1});
  const std::vector<double> p2{0.5, 0.5, 0.2};
  CHECK(ch.allocate_slots(p2).selected == std::vector<int>{0});

  Channel ch2(lossless(5, 3), 0);
  const std::vector<double> p3{0.2, 0.7, 0.7, 0.9, 0.1};
  const auto a = ch2.allocate_slots(p3);
  CHECK(a.selected == std::vector<int>{3, 1, 2});
  CHECK(a.sorted_ids() == std::vector<int>{1, 2, 3});
  CHECK_FALSE(a.fallback);
}

TEST_CASE("priorities outside the open interval are rejected") {
  Channel ch(lossless(3, 1), 0);
  CHECK_THROWS_AS(ch.allocate_slots(std::vector<double>{0.0, 0.5, 0.5}), InputError);
  CHECK_THROWS_AS(ch.allocate_slots(std::vector<double>{0.5, 1.0, 0.5}), InputError);
  CHECK_THROWS_AS(ch.allocate_slots(std::vector<double>{0.5, 0.5}), InputError);
  Channel rr(lossless(3, 1, CommMode::RoundRobin), 0);
  CHECK_NOTHROW(rr.allocate_slots(std::vector<double>{0.0, 0.0, 0.0}));
}

TEST_CASE("round-robin sequence") {
  Channel ch(lossless(6, 2, CommMode::RoundRobin), 0);
  const std::vector<double> none(6, 0.5);
  CHECK(ch.allocate_slots(none).selected == std::vector<int>{0, 1});
  CHECK(ch.allocate_slots(none).selected == std::vector<int>{2, 3});
  CHECK(ch.allocate_slots(none).selected == std::vector<int>{4, 5});
  CHECK(ch.allocate_slots(none).selected == std::vector<int>{0, 1});
}

TEST_CASE("round-robin fairness, exhaustive for small networks") {
  for (int n = 2; n <= 10; ++n) {
    for (int l = 1; l <= std::min(3, n - 1); ++l) {
      Channel ch(lossless(n, l, CommMode::RoundRobin), 0);
      const int steps = std::lcm(n, l) / l;
      std::vector<int> count(n, 0);
      const std::vector<double> p(n, 0.5);
      for (int t = 0; t < steps; ++t) {
        const auto a = ch.allocate_slots(p);
        CHECK(a.selected.size() == static_cast<std::size_t>(l));
        for (int i : a.selected) ++count[i];
      }
      for (int c : count) CHECK(c == std::lcm(n, l) / n);
    }
  }
}

TEST_CASE("lost priority exchange falls back to round-robin and advances the cursor") {
  NetworkConfig c = lossless(4, 1);
  c.priority_loss_prob = 0.5;
  Channel ch(c, 17);
  const std::vector<double> p{0.1, 0.2, 0.3, 0.99};
  int expected_cursor = 0, fallbacks = 0;
  for (int t = 0; t < 2000; ++t) {
    const auto a = ch.allocate_slots(p);
    if (a.fallback) {
      ++fallbacks;
      CHECK(a.selected == std::vector<int>{expected_cursor});
      expected_cursor = (expected_cursor + 1) % 4;
    } else {
      CHECK(a.selected == std::vector<int>{3});
    }
    CHECK(ch.cursor() == expected_cursor);
  }
  CHECK(fallbacks > 900);
  CHECK(fallbacks < 1100);
}

TEST_CASE("raising a priority never removes the agent") {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    const int l = 1 + static_cast<int>(rng() % (n - 1));
    std::vector<double> p(n);
    for (double& x : p) x = 0.01 + 0.98 * uniform01(rng);
    Channel ch(lossless(n, l), 0);
    const auto before = ch.allocate_slots(p).sorted_ids();
    for (int i : before) {
      auto q = p;
      q[i] = q[i] + (0.999 - q[i]) * uniform01(rng);
      const auto after = ch.allocate_slots(q).sorted_ids();
      CHECK(std::binary_search(after.begin(), after.end(), i));
    }
  }
}

TEST_CASE("loss extremes") {
  NetworkConfig c = lossless(4, 2);
  Channel keep(c, 0);
  const std::vector<int> sel{1, 3};
  const std::vector<Payload> pl{payload_of(1), payload_of(3)};
  CHECK(keep.transmit(0, sel, pl).empty());
  CHECK(keep.in_flight() == 2);

  c.loss_prob = 0.999999999;
  Channel drop(c, 0);
  CHECK(drop.transmit(0, sel, pl) == sel);
  CHECK(drop.in_flight() == 0);
}

TEST_CASE("empirical drop rate") {
  NetworkConfig c = lossless(2, 1);
  c.loss_prob = 0.2;
  Channel ch(c, 99);
  const std::vector<int> sel{0};
  const std::vector<Payload> pl{payload_of(0)};
  int dropped = 0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    dropped += static_cast<int>(ch.transmit(t, sel, pl).size());
    ch.deliver(t + 1);
  }
  CHECK(std::abs(double(dropped) / n - 0.2) < 0.01);
}

TEST_CASE("delivery timing and ordering") {
  Channel ch(lossless(4, 2), 0);
  CHECK(ch.deliver(0).empty());
  const std::vector<int> sel{2, 0};
  const std::vector<Payload> pl{payload_of(2), payload_of(0)};
  ch.transmit(5, sel, pl);
  CHECK(ch.deliver(5).empty());
  const auto got = ch.deliver(6);
  REQUIRE(got.size() == 2);
  CHECK(got[0].sender == 0);
  CHECK(got[1].sender == 2);
  CHECK(got[1].send_step == 5);
  CHECK(got[1].values() == payload_of(2));
  CHECK(ch.in_flight() == 0);
}

TEST_CASE("delay exactness for several delays") {
  for (int d : {0, 1, 3}) {
    NetworkConfig c = lossless(3, 1);
    c.delay_steps = d;
    Channel ch(c, 0);
    const std::vector<int> sel{1};
    const std::vector<Payload> pl{payload_of(1)};
    ch.transmit(10, sel, pl);
    for (int t = 10; t < 10 + d; ++t) CHECK(ch.deliver(t).empty());
    CHECK(ch.deliver(10 + d).size() == 1);
  }
}

TEST_CASE("dropped messages reach nobody") {
  NetworkConfig c = lossless(5, 2);
  c.loss_prob = 0.5;
  Channel ch(c, 3);
  for (int t = 0; t < 500; ++t) {
    const std::vector<int> sel{t % 5, (t + 2) % 5};
    const std::vector<Payload> pl{payload_of(sel[0]), payload_of(sel[1])};
    const auto dropped = ch.transmit(t, sel, pl);
    const auto got = ch.deliver(t + 1);
    CHECK(got.size() + dropped.size() == 2);
    for (int r = 0; r < 5; ++r) {
      const auto obs = assemble_comm_obs(got, r, 5);
      for (int j : dropped) CHECK(obs.segment(4 * j, 4).isZero());
    }
  }
}

TEST_CASE("assemble layout") {
  CHECK(assemble_comm_obs({}, 0, 3) == Eigen::VectorXd::Zero(12));
  Message m;
  m.sender = 1;
  m.payload = serialize_payload({1, 2, 3, 4});
  const std::vector<Message> one{m};
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(12);
  expect.segment(4, 4) << 1, 2, 3, 4;
  CHECK(assemble_comm_obs(one, 0, 3) == expect);
  CHECK(assemble_comm_obs(one, 1, 3).isZero());
  const std::vector<Message> dup{m, m};
  CHECK_THROWS_AS(assemble_comm_obs(dup, 0, 3), ProtocolError);
  m.sender = 3;
  CHECK_THROWS_AS(assemble_comm_obs(std::vector<Message>{m}, 0, 3), InputError);
}

TEST_CASE("payloads are 16 little-endian float32 bytes") {
  const auto wire = serialize_payload({1.0, -2.0, 0.5, 0.0});
  CHECK(wire.size() == 16);
  // 1.0f = 0x3f800000, little-endian.
  CHECK(wire[0] == std::byte{0x00});
  CHECK(wire[3] == std::byte{0x3f});
  CHECK(wire[2] == std::byte{0x80});
  // -2.0f = 0xc0000000
  CHECK(wire[7] == std::byte{0xc0});
}

TEST_CASE("priority wire size and quantization") {
  CHECK(priority_wire_size(8) == 3);
  CHECK(priority_wire_size(2) == 1);
  CHECK(priority_wire_size(256) == 8);
  CHECK(priority_wire_size(5) == 3);
  CHECK(quantize_priority(0.01, 8) == 0);
  CHECK(quantize_priority(0.5, 8) == 4);
  CHECK(quantize_priority(0.999999, 8) == 7);
}

TEST_CASE("identical seeds give identical channel behaviour") {
  NetworkConfig c;
  c.n_agents = 5;
  c.slots = 2;
  Channel a(c, 42), b(c, 42);
  const std::vector<double> p{0.1, 0.5, 0.3, 0.8, 0.6};
  std::vector<Payload> pl{payload_of(0), payload_of(1)};
  for (int t = 0; t < 200; ++t) {
    const auto sa = a.allocate_slots(p), sb = b.allocate_slots(p);
    CHECK(sa.selected == sb.selected);
    CHECK(sa.fallback == sb.fallback);
    CHECK(a.transmit(t, sa.selected, pl) == b.transmit(t, sb.selected, pl));
  }
}

TEST_CASE("config validation") {
  NetworkConfig c;
  c.slots = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.slots = 1;
  c.loss_prob = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.loss_prob = 0.2;
  c.delay_steps = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_mode("roundrobin") == CommMode::RoundRobin);
  CHECK_THROWS_AS(parse_mode("tdma"), ConfigError);
}

TEST_CASE("comm log and bandwidth report") {
  NetworkConfig c;
  c.n_agents = 8;
  BandwidthReport rep = make_bandwidth_report(c);
  Allocation a;
  a.selected = {2};
  rep.record(a, 0);
  a.fallback = true;
  rep.record(a, 1);
  CHECK(rep.messages_sent == 2);
  CHECK(rep.messages_dropped == 1);
  CHECK(rep.bytes_sent() == 32);
  CHECK(rep.priority_bits_per_step() == 8 * 3);
  const auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j.at("fallback_steps") == 1);

  std::ostringstream out;
  CommLogWriter log(out, 8);
  const std::vector<int> dropped{2};
  const std::vector<double> pr(8, 0.5);
  log.record(7, CommMode::Priority, a, dropped, pr);
  const std::string text = out.str();
  CHECK(text.rfind("# pmarl-comm-log v1", 0) == 0);
  CHECK(text.find("7,fallback,2,2,") != std::string::npos);
}

}  // namespace
