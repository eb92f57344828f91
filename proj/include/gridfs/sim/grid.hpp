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
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridfs/access/client.hpp"
#include "gridfs/aiod/server.hpp"
#include "gridfs/catalogue/catalogue.hpp"
#include "gridfs/catalogue/service.hpp"
#include "gridfs/simnet/simnet.hpp"
#include "gridfs/storage/service.hpp"
#include "gridfs/transfer/broker.hpp"

namespace gridfs::sim {

struct UserSpec {
  std::string user;
  std::vector<std::string> groups;
  std::string token;
};

struct SeSpec {
  std::string name;
  wire::Address address;
  std::string site;
  std::string plugin = "mem";
  std::vector<storage::VolumeSpec> volumes;  // empty: one 1 GiB volume
  std::uint64_t cache_budget_bytes = 64ull << 20;
};

struct AiodSpec {
  wire::Address listen;
  std::set<std::string> roles;
  std::vector<wire::Address> slaves;
  wire::Address gatekeeper;
  std::uint64_t cache_budget_bytes = 256ull << 20;
  std::uint64_t rate_limit = 0;
  std::uint64_t burst_bytes = 0;
};

// A whole grid on one simulated network. Every user gets a home directory
// /<user> and a published credential.
struct GridSpec {
  std::filesystem::path root;  // scratch space for caches and file plug-ins
  std::uint64_t seed = 1;
  double latency_ms = 1.0;
  std::uint64_t bandwidth_bps = 100'000'000;
  std::vector<simnet::SimLink> links;  // overrides for the full mesh
  std::vector<UserSpec> users;
  std::vector<SeSpec> ses;
  std::vector<AiodSpec> aiods;
  std::string default_se;
  std::string client_site;
  std::size_t broker_max_concurrent = 2;
  std::uint32_t broker_retry_limit = 3;

  // alice (alice, physics), bob (physics), eve; se1 at site cern, se2 at gsi;
  // aiod1..aiod3 plain cache servers.
  static GridSpec standard(std::filesystem::path root, std::uint64_t seed = 1);
  // Same keys as the fields; "network": {latency_ms, bandwidth_bps, links}.
  static GridSpec from_json(const json& j, std::filesystem::path root);
};

class SimGrid {
 public:
  static constexpr const char* kCatalogue = "catalogue:7000";
  static constexpr const char* kBroker = "broker:7300";

  explicit SimGrid(GridSpec spec);
  ~SimGrid();

  simnet::SimNetwork& net() noexcept { return *net_; }
  catalogue::Catalogue& catalogue() noexcept { return *catalogue_; }
  storage::StorageElement& se(const std::string& name);
  storage::SeService& se_service(const std::string& name);
  aiod::AiodServer& aiod(const wire::Address& address);
  transfer::TransferBroker& broker() noexcept { return *broker_; }
  const storage::SeDirectory& directory() const noexcept { return directory_; }
  const GridSpec& spec() const noexcept { return spec_; }

  // Client library for a user, created on first use.
  access::GridClient& client(const std::string& user);
  const std::string& token(const std::string& user) const;
  catalogue::Principal principal(const std::string& user) const;

 private:
  GridSpec spec_;
  std::unique_ptr<simnet::SimNetwork> net_;
  catalogue::AuthTable auth_;
  std::unique_ptr<catalogue::Catalogue> catalogue_;
  std::unique_ptr<catalogue::CatalogueService> catalogue_service_;
  storage::SeDirectory directory_;
  std::map<std::string, std::unique_ptr<storage::StorageElement>> ses_;
  std::map<std::string, std::unique_ptr<storage::SeService>> se_services_;
  std::map<wire::Address, std::unique_ptr<aiod::AiodServer>> aiods_;
  std::unique_ptr<transfer::TransferBroker> broker_;
  std::unique_ptr<transfer::TransferService> broker_service_;
  std::map<std::string, std::unique_ptr<access::GridClient>> clients_;
};

}  // namespace gridfs::sim
