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

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridfs/aiod/channel.hpp"
#include "gridfs/aiod/page_store.hpp"
#include "gridfs/aiod/policy.hpp"
#include "gridfs/wire/network.hpp"

namespace gridfs::aiod {

struct AiodConfig {
  wire::Address listen;              // own address, as it appears in routes
  std::set<std::string> roles;       // io_gatekeeper, cache_gatekeeper, slave_io, slave_cache
  std::vector<wire::Address> slaves;
  wire::Address gatekeeper;          // receiver of this server's load reports
  wire::Address catalogue_addr;
  std::filesystem::path cache_dir;
  std::uint64_t cache_budget_bytes = 1ull << 30;
  std::uint64_t rate_limit = 0;      // bytes/s per connection, 0 = unlimited
  std::uint64_t burst_bytes = 0;     // 0 = rate_limit / 10
  std::int64_t staleness_s = 10;
  std::int64_t locate_deadline_ms = 1000;
  int max_redirects = 4;

  bool has_role(std::string_view role) const { return roles.count(std::string(role)) > 0; }
  // Throws InvalidArgument on unknown roles or a gatekeeper without slaves.
  void validate() const;

  static AiodConfig from_json(const json& j);
  json to_json() const;
};

struct AiodStats {
  std::uint64_t next_hop_fetches = 0;
  std::uint64_t page_hits = 0;
  std::uint64_t page_misses = 0;
  std::uint64_t sessions_opened = 0;
  std::uint64_t redirects_issued = 0;
  std::uint64_t bytes_served = 0;
  std::uint64_t bytes_received = 0;

  json to_json() const;
};

// Cache-and-forward I/O server. Ops: OPEN, READ, WRITE, SYNC, CLOSE, ABORT,
// PRELOAD, LOCATE_GUID, LOAD_REPORT, STATS.
class AiodServer : public wire::Service {
 public:
  AiodServer(wire::Network& net, AiodConfig config);
  ~AiodServer() override;

  wire::Message handle(const wire::Address& caller, const wire::Message& request) override;

  const AiodConfig& config() const noexcept { return config_; }
  PageStore& pages() noexcept { return pages_; }
  AiodStats stats() const;
  std::size_t open_sessions() const;

  LoadReport current_load();
  // Sends current_load() to the configured gatekeeper.
  void report_load();
  void ingest(const LoadReport& report);
  // First slave holding pages of `guid` within the deadline, by response time.
  std::optional<wire::Address> locate_guid(const Guid& guid);
  wire::Address pick_slave();

 private:
  struct Session;

  json open(const wire::Message& request);
  std::shared_ptr<Session> session(const json& args);
  void end_session(const std::string& id);
  std::string read(Session& s, std::uint64_t offset, std::uint64_t length);
  void open_downstream(Session& s, std::uint64_t size_hint);
  void throttle(Session& s, std::uint64_t bytes);
  void note_traffic(std::uint64_t bytes);
  void validate(const AccessTicket& ticket, SessionMode mode, const std::string& token,
                std::uint64_t& size_out);

  wire::Network& net_;
  AiodConfig config_;
  PageStore pages_;
  wire::Dispatcher dispatch_;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<wire::Address, LoadReport> reports_;
  std::deque<std::pair<std::int64_t, std::uint64_t>> traffic_;  // (time, bytes) within the window
  std::uint64_t next_session_ = 1;

  std::atomic<std::uint64_t> next_hop_fetches_{0};
  std::atomic<std::uint64_t> page_hits_{0};
  std::atomic<std::uint64_t> page_misses_{0};
  std::atomic<std::uint64_t> sessions_opened_{0};
  std::atomic<std::uint64_t> redirects_issued_{0};
  std::atomic<std::uint64_t> bytes_served_{0};
  std::atomic<std::uint64_t> bytes_received_{0};
};

// Client-side helpers for the monitoring and lookup ops.
AiodStats fetch_stats(wire::Network& net, const wire::Address& self, const wire::Address& server);

}  // namespace gridfs::aiod
