// Copyright 2026 The gridfs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include <gtest/gtest.h>

#include "gridfs/simnet/simnet.hpp"
#include "gridfs/wire/network.hpp"
#include "support.hpp"

namespace gridfs::simnet {
namespace {

constexpr std::uint64_t kMiB = 1 << 20;

// Echoes the request data back and reports its own op name.
class Echo : public wire::Service {
 public:
  wire::Message handle(const wire::Address&, const wire::Message& request) override {
    ++calls;
    return wire::make_ok(wire::op_of(request), request.data);
  }
  int calls = 0;
};

SimNetwork two_nodes(double latency_ms, std::uint64_t bandwidth) {
  Topology t;
  t.add_node("a", "client");
  t.add_node("b", "se");
  t.connect("a", "b", latency_ms, bandwidth);
  return SimNetwork(t);
}

TEST(SimNetTest, ArrivalIsLatencyPlusSerialisation) {
  auto net = two_nodes(10, kMiB);
  const std::int64_t t = net.now_us();
  // Oracle: 10 ms + 1 MiB / (1 MiB/s) = 1010 ms.
  const std::int64_t expected = t + 10'000 + static_cast<std::int64_t>(kMiB * 1'000'000 / kMiB);
  EXPECT_EQ(net.deliver("a", "b", kMiB), expected);
  EXPECT_EQ(expected - t, 1'010'000);
}

TEST(SimNetTest, ZeroLengthFrameTakesOnlyLatency) {
  auto net = two_nodes(7.5, 1000);
  EXPECT_EQ(net.deliver("a", "b", 0), net.now_us() + 7'500);
}

TEST(SimNetTest, DownLinkIsLinkDown) {
  auto net = two_nodes(1, 1000);
  net.partition("b");
  EXPECT_ERRC(net.deliver("a", "b", 1), Errc::LinkDown);
  net.heal("b");
  EXPECT_NO_THROW(net.deliver("a", "b", 1));
}

TEST(SimNetTest, MissingLinkIsNoRoute) {
  Topology t;
  t.add_node("a", "client");
  t.add_node("b", "se");
  t.add_node("c", "se");
  t.connect("a", "b", 1, 1000);
  SimNetwork net(t);
  EXPECT_ERRC(net.deliver("a", "c", 1), Errc::NoRoute);
}

TEST(SimNetTest, PartitionUnknownNodeIsUnknownNode) {
  auto net = two_nodes(1, 1000);
  EXPECT_ERRC(net.partition("zz"), Errc::UnknownNode);
  EXPECT_ERRC(net.heal("zz"), Errc::UnknownNode);
}

TEST(SimNetTest, FramesOnOneLinkStayFifo) {
  auto net = two_nodes(5, 1000);
  // A large frame then a tiny one sent at the same instant: the tiny one may
  // not overtake.
  auto big = net.deliver("a", "b", 5000);
  auto small = net.deliver("a", "b", 1);
  EXPECT_GE(small, big);
}

TEST(SimNetTest, PartitionMidCallSurfacesTransportErrorThenHealRecovers) {
  auto net = two_nodes(10, kMiB);
  Echo echo;
  net.attach("b", echo);
  // The write is 1 MiB, so it is in flight for about a second.
  net.schedule_partition("b", net.now_us() + 500'000);
  std::string payload(kMiB, 'x');
  EXPECT_ERRC(net.call("a", "b", wire::make_request("write", json::object(), "", payload)), Errc::TransportError);
  EXPECT_EQ(echo.calls, 0);
  EXPECT_EQ(net.frames_dropped(), 1u);
  net.heal("b");
  auto reply = wire::rpc(net, "a", "b", "write", json::object(), "", payload);
  EXPECT_EQ(reply.data.size(), kMiB);
  EXPECT_EQ(echo.calls, 1);
}

TEST(SimNetTest, ConcurrentTasksStartTogether) {
  auto net = two_nodes(10, kMiB);
  Echo echo;
  net.attach("b", echo);
  const auto start = net.now_us();
  auto done = net.run_concurrently({
      [&] { wire::rpc(net, "a", "b", "x", json::object(), ""); },
      [&] { net.sleep_us(123); },
  });
  ASSERT_EQ(done.size(), 2u);
  EXPECT_EQ(net.now_us(), start);
  EXPECT_EQ(done[1], start + 123);
  EXPECT_GE(done[0], start + 20'000);
  net.advance_to(std::max(done[0], done[1]));
  EXPECT_EQ(net.now_us(), done[0]);
}

TEST(SimNetTest, TopologyRoundTripsThroughJson) {
  json doc = {{"nodes", {{{"name", "c"}, {"role", "client"}}, {{"name", "s"}, {"role", "se"}}}},
              {"full_mesh", {{"latency_ms", 2}, {"bandwidth_bps", 1000}}}};
  auto t = Topology::from_json(doc);
  ASSERT_EQ(t.links.size(), 1u);
  EXPECT_EQ(t.links[0].latency_ms, 2);
  auto again = Topology::from_json(t.to_json());
  EXPECT_EQ(again.to_json(), t.to_json());
}

// Runs a seeded random script and returns the trace hash.
std::pair<std::uint64_t, SimNetwork> run_script(std::uint64_t seed) {
  Topology t;
  for (int i = 0; i < 5; ++i) t.add_node("n" + std::to_string(i), "se");
  t.full_mesh(3, 100'000);
  SimNetwork net(t);
  static Echo echo;
  for (int i = 0; i < 5; ++i) net.attach("n" + std::to_string(i), echo);
  std::mt19937_64 rng(seed);
  for (int step = 0; step < 300; ++step) {
    auto from = "n" + std::to_string(rng() % 5);
    auto to = "n" + std::to_string(rng() % 5);
    switch (rng() % 5) {
      case 0:
        net.partition(to);
        break;
      case 1:
        net.heal(to);
        break;
      case 2:
        net.schedule_partition(to, net.now_us() + static_cast<std::int64_t>(rng() % 50'000));
        break;
      default:
        if (from == to) break;
        try {
          net.call(from, to, wire::make_request("x", json::object(), "", std::string(rng() % 20'000, 'd')));
        } catch (const Error&) {
        }
    }
  }
  return {net.trace_hash(), std::move(net)};
}

TEST(SimNetTest, IdenticalScriptsGiveIdenticalTraces) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto [h1, n1] = run_script(seed);
    auto [h2, n2] = run_script(seed);
    EXPECT_EQ(h1, h2);
    EXPECT_EQ(n1.trace_json(), n2.trace_json());
  }
  EXPECT_NE(run_script(1).first, run_script(2).first);
}

TEST(SimNetTest, EverySentFrameIsDeliveredOnceOrDroppedWithReason) {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    auto [hash, net] = run_script(seed);
    std::uint64_t delivers = 0;
    std::uint64_t drops = 0;
    std::set<std::uint64_t> seqs;
    for (const auto& e : net.trace()) {
      EXPECT_TRUE(seqs.insert(e.seq).second);
      if (e.kind == "deliver") ++delivers;
      if (e.kind == "drop") {
        ++drops;
        EXPECT_FALSE(e.reason.empty());
      }
    }
    EXPECT_EQ(net.frames_sent(), net.frames_delivered() + net.frames_dropped());
    EXPECT_EQ(delivers, net.frames_delivered());
    EXPECT_EQ(drops, net.frames_dropped());
  }
}

}  // namespace
}  // namespace gridfs::simnet
