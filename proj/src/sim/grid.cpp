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

#include "gridfs/sim/grid.hpp"

#include "gridfs/common/error.hpp"

namespace gridfs::sim {
namespace fs = std::filesystem;

using catalogue::LfnPath;
using catalogue::PermissionBits;
using catalogue::Principal;

namespace {

constexpr const char* kSuperuser = "admin";

}  // namespace

GridSpec GridSpec::standard(fs::path root, std::uint64_t seed) {
  GridSpec s;
  s.root = std::move(root);
  s.seed = seed;
  s.users = {{"alice", {"alice", "physics"}, "tok-alice"}, {"bob", {"physics"}, "tok-bob"}, {"eve", {}, "tok-eve"}};
  s.ses = {{"se1", "se1:7100", "cern", "mem", {}, 64ull << 20}, {"se2", "se2:7100", "gsi", "mem", {}, 64ull << 20}};
  for (int i = 1; i <= 3; ++i) {
    AiodSpec a;
    a.listen = "aiod" + std::to_string(i) + ":9000";
    s.aiods.push_back(a);
  }
  s.default_se = "se1";
  s.client_site = "cern";
  return s;
}

GridSpec GridSpec::from_json(const json& j, fs::path root) {
  GridSpec s;
  s.root = std::move(root);
  s.seed = j.value("seed", s.seed);
  if (j.contains("network")) {
    const auto& n = j["network"];
    s.latency_ms = n.value("latency_ms", s.latency_ms);
    s.bandwidth_bps = n.value("bandwidth_bps", s.bandwidth_bps);
    for (const auto& l : n.value("links", json::array())) {
      s.links.push_back({l.at("a").get<std::string>(), l.at("b").get<std::string>(), l.value("latency_ms", 0.0),
                         l.at("bandwidth_bps").get<std::uint64_t>(), true});
    }
  }
  for (const auto& u : j.at("users")) {
    s.users.push_back({u.at("user").get<std::string>(), u.value("groups", std::vector<std::string>{}),
                       u.at("token").get<std::string>()});
  }
  for (const auto& e : j.at("ses")) {
    SeSpec se;
    se.name = e.at("name").get<std::string>();
    se.address = e.at("address").get<std::string>();
    se.site = e.value("site", std::string());
    se.plugin = e.value("plugin", se.plugin);
    se.cache_budget_bytes = e.value("cache_budget_bytes", se.cache_budget_bytes);
    for (const auto& v : e.value("volumes", json::array())) se.volumes.push_back(storage::VolumeSpec::from_json(v));
    s.ses.push_back(std::move(se));
  }
  for (const auto& a : j.value("aiods", json::array())) {
    AiodSpec spec;
    spec.listen = a.at("listen").get<std::string>();
    for (const auto& r : a.value("roles", json::array())) spec.roles.insert(r.get<std::string>());
    spec.slaves = a.value("slaves", std::vector<std::string>{});
    spec.gatekeeper = a.value("gatekeeper", std::string());
    spec.cache_budget_bytes = a.value("cache_budget_bytes", spec.cache_budget_bytes);
    spec.rate_limit = a.value("rate_limit", spec.rate_limit);
    spec.burst_bytes = a.value("burst_bytes", spec.burst_bytes);
    s.aiods.push_back(std::move(spec));
  }
  s.default_se = j.value("default_se", s.ses.empty() ? std::string() : s.ses.front().name);
  s.client_site = j.value("client_site", std::string());
  if (j.contains("broker")) {
    s.broker_max_concurrent = j["broker"].value("max_concurrent", s.broker_max_concurrent);
    s.broker_retry_limit = j["broker"].value("retry_limit", s.broker_retry_limit);
  }
  return s;
}

SimGrid::SimGrid(GridSpec spec) : spec_(std::move(spec)) {
  fs::create_directories(spec_.root);
  simnet::Topology topo;
  topo.add_node(kCatalogue, "catalogue");
  topo.add_node(kBroker, "broker");
  for (const auto& se : spec_.ses) topo.add_node(se.address, "se");
  for (const auto& a : spec_.aiods) topo.add_node(a.listen, "aiod");
  for (const auto& u : spec_.users) topo.add_node("client-" + u.user, "client");
  for (const auto& l : spec_.links) topo.connect(l.a, l.b, l.latency_ms, l.bandwidth_bps);
  topo.full_mesh(spec_.latency_ms, spec_.bandwidth_bps);
  net_ = std::make_unique<simnet::SimNetwork>(topo);

  auth_.add("tok-admin", {kSuperuser, {kSuperuser}});
  for (const auto& u : spec_.users) auth_.add(u.token, {u.user, u.groups});

  catalogue::CatalogueOptions opts;
  opts.superuser = kSuperuser;
  opts.seed = spec_.seed;
  catalogue_ = std::make_unique<catalogue::Catalogue>(opts);
  catalogue_service_ = std::make_unique<catalogue::CatalogueService>(*catalogue_, auth_);
  net_->attach(kCatalogue, *catalogue_service_);

  const Principal admin{kSuperuser, {kSuperuser}};
  for (const auto& u : spec_.users) {
    const auto home = LfnPath::parse("/" + u.user);
    catalogue_->mkdir(admin, home, PermissionBits(0755));
    catalogue_->set_access(admin, home, u.user, Principal{u.user, u.groups}.primary_group(), std::nullopt);
  }

  auto* net = net_.get();
  for (const auto& s : spec_.ses) {
    storage::SeConfig c;
    c.se_name = s.name;
    c.plugin = s.plugin;
    c.listen = s.address;
    c.site = s.site;
    c.cache_dir = spec_.root / ("se-" + s.name) / "cache";
    c.cache_budget_bytes = s.cache_budget_bytes;
    c.volumes = s.volumes;
    if (c.volumes.empty()) c.volumes.push_back({"v0", "/data", 1ull << 30, std::nullopt});
    if (c.plugin == "file") {
      for (auto& v : c.volumes) v.mount_point = (spec_.root / ("se-" + s.name) / v.id).string();
    }
    ses_[s.name] = std::make_unique<storage::StorageElement>(c, [net] { return net->now_s(); });
    se_services_[s.name] = std::make_unique<storage::SeService>(*ses_[s.name], &auth_);
    net_->attach(s.address, *se_services_[s.name]);
    directory_.add({s.name, s.address, s.site});
  }

  for (const auto& a : spec_.aiods) {
    aiod::AiodConfig c;
    c.listen = a.listen;
    c.roles = a.roles;
    c.slaves = a.slaves;
    c.gatekeeper = a.gatekeeper;
    c.catalogue_addr = kCatalogue;
    c.cache_dir = spec_.root / ("aiod-" + a.listen.substr(0, a.listen.find(':')));
    c.cache_budget_bytes = a.cache_budget_bytes;
    c.rate_limit = a.rate_limit;
    c.burst_bytes = a.burst_bytes;
    aiods_[a.listen] = std::make_unique<aiod::AiodServer>(*net_, c);
    net_->attach(a.listen, *aiods_[a.listen]);
  }

  transfer::BrokerConfig bc;
  bc.listen = kBroker;
  bc.catalogue_addr = kCatalogue;
  bc.token = "tok-admin";
  bc.max_concurrent = spec_.broker_max_concurrent;
  bc.retry_limit = spec_.broker_retry_limit;
  bc.ses = directory_;
  broker_ = std::make_unique<transfer::TransferBroker>(*net_, bc);
  broker_service_ = std::make_unique<transfer::TransferService>(*broker_);
  net_->attach(kBroker, *broker_service_);

  for (const auto& u : spec_.users) client(u.user).publish_credential();
}

SimGrid::~SimGrid() {
  clients_.clear();
  broker_service_.reset();
  broker_.reset();
  aiods_.clear();
  se_services_.clear();
  ses_.clear();
}

storage::StorageElement& SimGrid::se(const std::string& name) {
  auto it = ses_.find(name);
  if (it == ses_.end()) fail(Errc::UnknownSe, "no storage element " + name);
  return *it->second;
}

storage::SeService& SimGrid::se_service(const std::string& name) {
  auto it = se_services_.find(name);
  if (it == se_services_.end()) fail(Errc::UnknownSe, "no storage element " + name);
  return *it->second;
}

aiod::AiodServer& SimGrid::aiod(const wire::Address& address) {
  auto it = aiods_.find(address);
  if (it == aiods_.end()) fail(Errc::UnknownNode, "no aiod at " + address);
  return *it->second;
}

const std::string& SimGrid::token(const std::string& user) const {
  for (const auto& u : spec_.users) {
    if (u.user == user) return u.token;
  }
  fail(Errc::NotFound, "no user " + user);
}

Principal SimGrid::principal(const std::string& user) const {
  for (const auto& u : spec_.users) {
    if (u.user == user) return {u.user, u.groups};
  }
  fail(Errc::NotFound, "no user " + user);
}

access::GridClient& SimGrid::client(const std::string& user) {
  auto it = clients_.find(user);
  if (it != clients_.end()) return *it->second;
  access::ClientConfig c;
  c.self = "client-" + user;
  c.catalogue_addr = kCatalogue;
  c.default_se = spec_.default_se;
  c.site = spec_.client_site;
  c.cache_dir = spec_.root / ("client-" + user);
  c.token = token(user);
  c.ses = directory_;
  auto [pos, inserted] = clients_.emplace(user, std::make_unique<access::GridClient>(*net_, c));
  return *pos->second;
}

}  // namespace gridfs::sim
