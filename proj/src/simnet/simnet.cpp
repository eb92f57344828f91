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

#include "gridfs/simnet/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

namespace gridfs::simnet {
namespace {

std::pair<Address, Address> link_key(const Address& a, const Address& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

std::int64_t transmission_us(std::uint64_t bytes, std::uint64_t bandwidth_bps) {
  if (bytes == 0) return 0;
  // ceil(bytes * 1e6 / bandwidth) without overflow for frames up to 4 GiB
  long double us = static_cast<long double>(bytes) * 1'000'000.0L / static_cast<long double>(bandwidth_bps);
  return static_cast<std::int64_t>(std::ceil(us));
}

}  // namespace

Topology Topology::from_json(const json& doc) {
  Topology topo;
  for (const auto& n : doc.value("nodes", json::array())) {
    topo.add_node(n.at("name").get<std::string>(), n.value("role", std::string()));
  }
  for (const auto& l : doc.value("links", json::array())) {
    topo.connect(l.at("a").get<std::string>(), l.at("b").get<std::string>(), l.value("latency_ms", 0.0),
                 l.at("bandwidth_bps").get<std::uint64_t>());
  }
  if (doc.contains("full_mesh")) {
    const auto& m = doc["full_mesh"];
    topo.full_mesh(m.value("latency_ms", 0.0), m.at("bandwidth_bps").get<std::uint64_t>());
  }
  return topo;
}

json Topology::to_json() const {
  json doc = {{"nodes", json::array()}, {"links", json::array()}};
  for (const auto& n : nodes) doc["nodes"].push_back({{"name", n.name}, {"role", n.role}});
  for (const auto& l : links) {
    doc["links"].push_back({{"a", l.a}, {"b", l.b}, {"latency_ms", l.latency_ms}, {"bandwidth_bps", l.bandwidth_bps}});
  }
  return doc;
}

void Topology::add_node(Address name, std::string role) {
  for (const auto& n : nodes) {
    if (n.name == name) fail(Errc::InvalidArgument, "duplicate node " + name);
  }
  nodes.push_back({std::move(name), std::move(role)});
}

void Topology::connect(const Address& a, const Address& b, double latency_ms, std::uint64_t bandwidth_bps) {
  if (latency_ms < 0) fail(Errc::InvalidArgument, "negative latency on link " + a + "-" + b);
  if (bandwidth_bps == 0) fail(Errc::InvalidArgument, "zero bandwidth on link " + a + "-" + b);
  if (a == b) fail(Errc::InvalidArgument, "self link on " + a);
  links.push_back({a, b, latency_ms, bandwidth_bps, true});
}

void Topology::full_mesh(double latency_ms, std::uint64_t bandwidth_bps) {
  std::set<std::pair<Address, Address>> present;
  for (const auto& l : links) present.insert(link_key(l.a, l.b));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (!present.count(link_key(nodes[i].name, nodes[j].name))) {
        connect(nodes[i].name, nodes[j].name, latency_ms, bandwidth_bps);
      }
    }
  }
}

json TraceEvent::to_json() const {
  json j = {{"seq", seq}, {"kind", kind}, {"sent_us", sent_us}, {"at_us", at_us},
            {"from", from}, {"to", to},   {"bytes", bytes}};
  if (!reason.empty()) j["reason"] = reason;
  return j;
}

SimNetwork::SimNetwork(Topology topology) : topology_(std::move(topology)) {
  for (const auto& n : topology_.nodes) nodes_.insert(n.name);
  for (const auto& l : topology_.links) {
    require_node(l.a);
    require_node(l.b);
    auto key = link_key(l.a, l.b);
    if (links_.count(key)) fail(Errc::InvalidArgument, "duplicate link " + l.a + "-" + l.b);
    links_[key].link = l;
  }
}

void SimNetwork::attach(const Address& node, wire::Service& service) {
  require_node(node);
  services_[node] = &service;
}

void SimNetwork::detach(const Address& node) { services_.erase(node); }

void SimNetwork::require_node(const Address& node) const {
  if (!nodes_.count(node)) fail(Errc::UnknownNode, "unknown node " + node);
}

SimNetwork::LinkState* SimNetwork::find_link(const Address& a, const Address& b) {
  auto it = links_.find(link_key(a, b));
  return it == links_.end() ? nullptr : &it->second;
}

const SimNetwork::LinkState* SimNetwork::find_link(const Address& a, const Address& b) const {
  auto it = links_.find(link_key(a, b));
  return it == links_.end() ? nullptr : &it->second;
}

bool SimNetwork::is_up(const Address& a, const Address& b) const {
  const auto* l = find_link(a, b);
  return l != nullptr && l->link.up;
}

void SimNetwork::record(TraceEvent event) {
  event.seq = seq_++;
  hash_ = fnv1a(event.to_json().dump(), hash_);
  if (keep_trace_) trace_.push_back(std::move(event));
}

void SimNetwork::set_node_links(const Address& node, bool up) {
  for (auto& [key, state] : links_) {
    if (key.first == node || key.second == node) state.link.up = up;
  }
}

void SimNetwork::partition(const Address& node) {
  require_node(node);
  set_node_links(node, false);
  record({0, "partition", now_us_, now_us_, node, node, 0, ""});
}

void SimNetwork::heal(const Address& node) {
  require_node(node);
  set_node_links(node, true);
  record({0, "heal", now_us_, now_us_, node, node, 0, ""});
}

void SimNetwork::schedule_partition(const Address& node, std::int64_t at_us) {
  require_node(node);
  faults_.insert({at_us, fault_seq_++, node, true});
}

void SimNetwork::schedule_heal(const Address& node, std::int64_t at_us) {
  require_node(node);
  faults_.insert({at_us, fault_seq_++, node, false});
}

std::set<Address> SimNetwork::fire_faults_until(std::int64_t t) {
  std::set<Address> partitioned;
  while (!faults_.empty() && faults_.begin()->at_us <= t) {
    ScheduledFault f = *faults_.begin();
    faults_.erase(faults_.begin());
    set_node_links(f.node, !f.partition);
    record({0, f.partition ? "partition" : "heal", f.at_us, f.at_us, f.node, f.node, 0, "scheduled"});
    if (f.partition) {
      partitioned.insert(f.node);
    } else {
      partitioned.erase(f.node);
    }
  }
  return partitioned;
}

std::int64_t SimNetwork::deliver(const Address& from, const Address& to, std::uint64_t bytes) {
  ++frames_sent_;
  fire_faults_until(now_us_);
  auto drop = [&](Errc code, const std::string& reason) {
    ++frames_dropped_;
    record({0, "drop", now_us_, now_us_, from, to, bytes, reason});
    fail(code, reason + " (" + from + " -> " + to + ")");
  };
  if (!nodes_.count(from) || !nodes_.count(to)) drop(Errc::NoRoute, "NoRoute");
  LinkState* state = find_link(from, to);
  if (state == nullptr) drop(Errc::NoRoute, "NoRoute");
  if (!state->link.up) drop(Errc::LinkDown, "LinkDown");

  std::int64_t arrival = now_us_ + static_cast<std::int64_t>(std::llround(state->link.latency_ms * 1000.0)) +
                         transmission_us(bytes, state->link.bandwidth_bps);
  auto& last = state->last[from < to];
  if (now_us_ >= last.first) {
    arrival = std::max(arrival, last.second);
    last = {now_us_, arrival};
  }

  auto partitioned = fire_faults_until(arrival);
  if (partitioned.count(from) || partitioned.count(to)) {
    ++frames_dropped_;
    record({0, "drop", now_us_, arrival, from, to, bytes, "partitioned in flight"});
    fail(Errc::LinkDown, "frame dropped in flight (" + from + " -> " + to + ")");
  }
  ++frames_delivered_;
  record({0, "deliver", now_us_, arrival, from, to, bytes, ""});
  return arrival;
}

wire::Message SimNetwork::call(const Address& from, const Address& to, const wire::Message& request) {
  auto transmit = [&](const Address& src, const Address& dst, const std::string& bytes) {
    try {
      now_us_ = deliver(src, dst, bytes.size());
    } catch (const Error& e) {
      fail(Errc::TransportError, e.what());
    }
  };
  std::string outbound = wire::encode(request);
  transmit(from, to, outbound);
  auto it = services_.find(to);
  if (it == services_.end()) fail(Errc::TransportError, "connection refused by " + to);
  wire::Message response = it->second->handle(from, wire::decode(outbound));
  std::string inbound = wire::encode(response);
  transmit(to, from, inbound);
  return wire::decode(inbound);
}

void SimNetwork::sleep_us(std::int64_t duration) {
  if (duration > 0) now_us_ += duration;
  fire_faults_until(now_us_);
}

std::vector<std::int64_t> SimNetwork::run_concurrently(std::vector<std::function<void()>> tasks) {
  const std::int64_t start = now_us_;
  std::vector<std::int64_t> done;
  done.reserve(tasks.size());
  std::exception_ptr first_error;
  for (auto& task : tasks) {
    now_us_ = start;
    try {
      task();
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
    done.push_back(now_us_);
  }
  now_us_ = start;
  if (first_error) std::rethrow_exception(first_error);
  return done;
}

void SimNetwork::advance_to(std::int64_t t_us) {
  now_us_ = std::max(now_us_, t_us);
  fire_faults_until(now_us_);
}

json SimNetwork::trace_json() const {
  json events = json::array();
  for (const auto& e : trace_) events.push_back(e.to_json());
  return events;
}

std::string SimNetwork::trace_hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(trace_hash()));
  return buf;
}

}  // namespace gridfs::simnet
