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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridfs/common/hash.hpp"
#include "gridfs/wire/network.hpp"

namespace gridfs::simnet {

using wire::Address;
using json = nlohmann::json;

struct SimLink {
  Address a;
  Address b;
  double latency_ms = 0.0;
  std::uint64_t bandwidth_bps = 0;  // bytes per second
  bool up = true;
};

struct NodeInfo {
  Address name;
  std::string role;  // client, catalogue, se, aiod, broker
};

// Static description of the simulated network. Links are symmetric and
// every pair of nodes that exchanges messages needs a direct link.
struct Topology {
  std::vector<NodeInfo> nodes;
  std::vector<SimLink> links;

  // Accepts {"nodes":[{name,role}], "links":[{a,b,latency_ms,bandwidth_bps}],
  // "full_mesh": {latency_ms, bandwidth_bps}}; full_mesh links every pair of
  // nodes that has no explicit link.
  static Topology from_json(const json& doc);
  json to_json() const;

  void add_node(Address name, std::string role);
  void connect(const Address& a, const Address& b, double latency_ms, std::uint64_t bandwidth_bps);
  void full_mesh(double latency_ms, std::uint64_t bandwidth_bps);
};

struct TraceEvent {
  std::uint64_t seq = 0;
  std::string kind;  // deliver, drop, partition, heal
  std::int64_t sent_us = 0;
  std::int64_t at_us = 0;
  Address from;
  Address to;
  std::uint64_t bytes = 0;
  std::string reason;

  json to_json() const;
};

// Deterministic in-process network. Time is virtual (microseconds) and only
// advances through message delivery, sleeps, and explicit joins. Calls are
// executed synchronously: the request is delivered, the target service
// handles it (possibly issuing nested calls), and the response is delivered
// back, each hop advancing the clock by latency + size / bandwidth.
class SimNetwork : public wire::Network {
 public:
  explicit SimNetwork(Topology topology);

  void attach(const Address& node, wire::Service& service);
  void detach(const Address& node);

  // Transmits `bytes` from -> to starting at now_us() and returns the arrival
  // time. Throws Error(LinkDown) or Error(NoRoute); a frame whose endpoint is
  // partitioned while in flight is dropped and reported as LinkDown.
  std::int64_t deliver(const Address& from, const Address& to, std::uint64_t bytes);

  void partition(const Address& node);
  void heal(const Address& node);
  void schedule_partition(const Address& node, std::int64_t at_us);
  void schedule_heal(const Address& node, std::int64_t at_us);
  bool is_up(const Address& a, const Address& b) const;

  wire::Message call(const Address& from, const Address& to, const wire::Message& request) override;
  std::int64_t now_us() const override { return now_us_; }
  void sleep_us(std::int64_t duration) override;
  std::vector<std::int64_t> run_concurrently(std::vector<std::function<void()>> tasks) override;
  void advance_to(std::int64_t t_us) override;

  // Events are always hashed; keeping them in memory is optional for long runs.
  void keep_trace(bool keep) noexcept { keep_trace_ = keep; }
  const std::vector<TraceEvent>& trace() const noexcept { return trace_; }
  std::uint64_t trace_length() const noexcept { return seq_; }
  json trace_json() const;
  // FNV-1a over the serialized trace.
  std::uint64_t trace_hash() const noexcept { return hash_; }
  std::string trace_hash_hex() const;

  std::uint64_t frames_sent() const noexcept { return frames_sent_; }
  std::uint64_t frames_delivered() const noexcept { return frames_delivered_; }
  std::uint64_t frames_dropped() const noexcept { return frames_dropped_; }

  const Topology& topology() const noexcept { return topology_; }

 private:
  struct ScheduledFault {
    std::int64_t at_us;
    std::uint64_t seq;
    Address node;
    bool partition;
    friend auto operator<=>(const ScheduledFault&, const ScheduledFault&) = default;
  };
  struct LinkState {
    SimLink link;
    // Per direction: send time and arrival of the most recent frame, used to
    // keep delivery FIFO for frames sent in non-decreasing time.
    std::map<bool, std::pair<std::int64_t, std::int64_t>> last;
  };

  LinkState* find_link(const Address& a, const Address& b);
  const LinkState* find_link(const Address& a, const Address& b) const;
  void require_node(const Address& node) const;
  void set_node_links(const Address& node, bool up);
  // Applies scheduled faults up to t; returns nodes partitioned in (from, t].
  std::set<Address> fire_faults_until(std::int64_t t);
  void record(TraceEvent event);

  Topology topology_;
  std::set<Address> nodes_;
  std::map<std::pair<Address, Address>, LinkState> links_;
  std::map<Address, wire::Service*> services_;
  std::set<ScheduledFault> faults_;
  std::int64_t now_us_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t fault_seq_ = 0;
  std::uint64_t hash_ = kFnvOffset;
  bool keep_trace_ = true;
  std::vector<TraceEvent> trace_;
  std::uint64_t frames_sent_ = 0;
  std::uint64_t frames_delivered_ = 0;
  std::uint64_t frames_dropped_ = 0;
};

}  // namespace gridfs::simnet
