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

#include "gridfs/catalogue/service.hpp"

#include "gridfs/common/error.hpp"

namespace gridfs::catalogue {
namespace {

using wire::make_ok;
using wire::Message;

LfnPath lfn_arg(const json& args, const char* key) { return LfnPath::parse(args.at(key).get<std::string>()); }
Pfn pfn_arg(const json& args, const char* key) { return Pfn::parse(args.at(key).get<std::string>()); }
PermissionBits perms_arg(const json& args, const char* fallback) {
  return PermissionBits::from_octal(args.value("perms", std::string(fallback)));
}

json pfns_to_json(const std::vector<Pfn>& pfns) {
  json out = json::array();
  for (const auto& p : pfns) out.push_back(p.str());
  return out;
}

std::vector<Pfn> pfns_from_json(const json& j) {
  std::vector<Pfn> out;
  for (const auto& p : j) out.push_back(Pfn::parse(p.get<std::string>()));
  return out;
}

}  // namespace

void AuthTable::add(std::string token, Principal who) {
  if (token.empty()) fail(Errc::InvalidArgument, "empty token");
  users_[std::move(token)] = std::move(who);
}

Principal AuthTable::lookup(std::string_view token) const {
  auto it = users_.find(token);
  if (it == users_.end()) fail(Errc::Unauthenticated, "unknown token");
  return it->second;
}

AuthTable AuthTable::from_json(const json& users) {
  AuthTable table;
  for (const auto& u : users) table.add(u.at("token").get<std::string>(), Principal::from_json(u));
  return table;
}

json to_json(const Resolved& r) { return {{"guid", r.guid.to_string()}, {"size", r.size}, {"pfns", pfns_to_json(r.pfns)}}; }

Resolved resolved_from_json(const json& j) {
  return {Guid::parse(j.at("guid").get<std::string>()), j.at("size").get<std::uint64_t>(), pfns_from_json(j.at("pfns"))};
}

json to_json(const DirEntry& e) {
  return {{"name", e.name},   {"dir", e.is_dir},     {"virtual", e.is_virtual},     {"size", e.size},
          {"owner", e.owner}, {"group", e.group}, {"perms", e.perms.to_octal()}};
}

DirEntry dir_entry_from_json(const json& j) {
  return {j.at("name").get<std::string>(),  j.at("dir").get<bool>(),          j.at("virtual").get<bool>(),
          j.at("size").get<std::uint64_t>(), j.at("owner").get<std::string>(), j.at("group").get<std::string>(),
          PermissionBits::from_octal(j.at("perms").get<std::string>())};
}

json to_json(const Stat& s) {
  json j = {{"dir", s.is_dir}, {"size", s.size}, {"owner", s.owner}, {"group", s.group}, {"perms", s.perms.to_octal()}};
  if (s.guid) j["guid"] = s.guid->to_string();
  return j;
}

Stat stat_from_json(const json& j) {
  Stat s{j.at("dir").get<bool>(), j.at("size").get<std::uint64_t>(), j.at("owner").get<std::string>(),
         j.at("group").get<std::string>(), PermissionBits::from_octal(j.at("perms").get<std::string>()), std::nullopt};
  if (j.contains("guid")) s.guid = Guid::parse(j["guid"].get<std::string>());
  return s;
}

CatalogueService::CatalogueService(Catalogue& catalogue, const AuthTable& auth) : catalogue_(catalogue), auth_(auth) {
  auto& c = catalogue_;
  auto who = [this](const Message& m) { return auth_.lookup(wire::auth_of(m)); };
  auto& d = dispatch_;

  d.on("auth", [who](const auto&, const Message& m) { return make_ok(who(m).to_json()); });
  d.on("mkdir", [&c, who](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    c.mkdir(who(m), lfn_arg(a, "path"), perms_arg(a, "755"));
    return make_ok(nullptr);
  });
  d.on("register_file", [&c, who](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    c.register_file(who(m), lfn_arg(a, "lfn"), pfn_arg(a, "pfn"), a.at("size").get<std::uint64_t>(),
                    Guid::parse(a.at("guid").get<std::string>()), perms_arg(a, "644"));
    return make_ok(nullptr);
  });
  d.on("resolve", [&c, who](const auto&, const Message& m) {
    return make_ok(to_json(c.resolve(who(m), lfn_arg(wire::args_of(m), "lfn"))));
  });
  d.on("add_replica", [&c, who](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    c.add_replica(who(m), lfn_arg(a, "lfn"), pfn_arg(a, "pfn"), a.at("size").get<std::uint64_t>());
    return make_ok(nullptr);
  });
  d.on("remove_replica", [&c, who](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    c.remove_replica(who(m), lfn_arg(a, "lfn"), pfn_arg(a, "pfn"));
    return make_ok(nullptr);
  });
  d.on("remove", [&c, who](const auto&, const Message& m) {
    return make_ok(pfns_to_json(c.remove(who(m), lfn_arg(wire::args_of(m), "lfn"))));
  });
  d.on("move", [&c, who](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    c.move(who(m), lfn_arg(a, "from"), lfn_arg(a, "to"));
    return make_ok(nullptr);
  });
  d.on("set_access", [&c, who](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    std::optional<std::string> owner;
    std::optional<std::string> group;
    std::optional<PermissionBits> perms;
    if (a.contains("owner")) owner = a["owner"].get<std::string>();
    if (a.contains("group")) group = a["group"].get<std::string>();
    if (a.contains("perms")) perms = PermissionBits::from_octal(a["perms"].get<std::string>());
    c.set_access(who(m), lfn_arg(a, "path"), owner, group, perms);
    return make_ok(nullptr);
  });
  d.on("read_metadata", [&c, who](const auto&, const Message& m) {
    return make_ok(c.read_metadata(who(m), lfn_arg(wire::args_of(m), "lfn")));
  });
  d.on("set_metadata", [&c, who](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    c.set_metadata(who(m), lfn_arg(a, "lfn"), a.at("name").get<std::string>(), a.at("value").get<std::string>());
    return make_ok(nullptr);
  });
  d.on("list_dir", [&c, who](const auto&, const Message& m) {
    json out = json::array();
    for (const auto& e : c.list_dir(who(m), lfn_arg(wire::args_of(m), "path"))) out.push_back(to_json(e));
    return make_ok(std::move(out));
  });
  d.on("stat", [&c, who](const auto&, const Message& m) {
    return make_ok(to_json(c.stat(who(m), lfn_arg(wire::args_of(m), "path"))));
  });
  d.on("mint_guid", [&c, who](const auto&, const Message& m) {
    return make_ok(c.mint_guid(who(m), lfn_arg(wire::args_of(m), "lfn")).to_string());
  });
  d.on("is_pending", [&c, who](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    who(m);
    return make_ok(c.is_pending(lfn_arg(a, "lfn"), Guid::parse(a.at("guid").get<std::string>())));
  });
  d.on("put_inline", [&c, who](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    c.put_inline(who(m), lfn_arg(a, "lfn"), m.data, perms_arg(a, "600"));
    return make_ok(nullptr);
  });
  d.on("read_inline", [&c, who](const auto&, const Message& m) {
    return make_ok(nullptr, c.read_inline(who(m), lfn_arg(wire::args_of(m), "lfn")));
  });
}

wire::Message CatalogueService::handle(const wire::Address& caller, const wire::Message& request) {
  return dispatch_.handle(caller, request);
}

CatalogueClient::CatalogueClient(wire::Network& net, wire::Address self, wire::Address catalogue, std::string token)
    : net_(net), self_(std::move(self)), catalogue_(std::move(catalogue)), token_(std::move(token)) {}

void CatalogueClient::authenticate() {
  auto reply = wire::rpc(net_, self_, catalogue_, "auth", json::object(), token_);
  principal_ = Principal::from_json(reply.value);
  connected_ = true;
}

const Principal& CatalogueClient::whoami() {
  std::lock_guard lock(mu_);
  if (!connected_) {
    try {
      authenticate();
    } catch (const Error& e) {
      if (e.code() == Errc::TransportError) connected_ = false;
      throw;
    }
  }
  return *principal_;
}

wire::Reply CatalogueClient::call_raw(std::string_view op, json args, std::string data) {
  std::lock_guard lock(mu_);
  try {
    if (!connected_) {
      if (principal_) ++reconnects_;
      authenticate();
    }
    return wire::rpc(net_, self_, catalogue_, op, std::move(args), token_, std::move(data));
  } catch (const Error& e) {
    if (e.code() == Errc::TransportError) connected_ = false;
    throw;
  }
}

json CatalogueClient::call(std::string_view op, json args) { return call_raw(op, std::move(args)).value; }

void CatalogueClient::mkdir(const LfnPath& path, PermissionBits perms) {
  call("mkdir", {{"path", path.str()}, {"perms", perms.to_octal()}});
}

void CatalogueClient::register_file(const LfnPath& lfn, const Pfn& pfn, std::uint64_t size, const Guid& guid,
                                    PermissionBits perms) {
  call("register_file",
       {{"lfn", lfn.str()}, {"pfn", pfn.str()}, {"size", size}, {"guid", guid.to_string()}, {"perms", perms.to_octal()}});
}

Resolved CatalogueClient::resolve(const LfnPath& lfn) { return resolved_from_json(call("resolve", {{"lfn", lfn.str()}})); }

void CatalogueClient::add_replica(const LfnPath& lfn, const Pfn& pfn, std::uint64_t observed_size) {
  call("add_replica", {{"lfn", lfn.str()}, {"pfn", pfn.str()}, {"size", observed_size}});
}

void CatalogueClient::remove_replica(const LfnPath& lfn, const Pfn& pfn) {
  call("remove_replica", {{"lfn", lfn.str()}, {"pfn", pfn.str()}});
}

std::vector<Pfn> CatalogueClient::remove(const LfnPath& lfn) { return pfns_from_json(call("remove", {{"lfn", lfn.str()}})); }

void CatalogueClient::move(const LfnPath& from, const LfnPath& to) {
  call("move", {{"from", from.str()}, {"to", to.str()}});
}

void CatalogueClient::set_access(const LfnPath& path, const std::optional<std::string>& owner,
                                 const std::optional<std::string>& group, const std::optional<PermissionBits>& perms) {
  json args = {{"path", path.str()}};
  if (owner) args["owner"] = *owner;
  if (group) args["group"] = *group;
  if (perms) args["perms"] = perms->to_octal();
  call("set_access", std::move(args));
}

std::string CatalogueClient::read_metadata(const LfnPath& lfn) {
  return call("read_metadata", {{"lfn", lfn.str()}}).get<std::string>();
}

void CatalogueClient::set_metadata(const LfnPath& lfn, const std::string& name, const std::string& value) {
  call("set_metadata", {{"lfn", lfn.str()}, {"name", name}, {"value", value}});
}

std::vector<DirEntry> CatalogueClient::list_dir(const LfnPath& dir) {
  std::vector<DirEntry> out;
  for (const auto& e : call("list_dir", {{"path", dir.str()}})) out.push_back(dir_entry_from_json(e));
  return out;
}

Stat CatalogueClient::stat(const LfnPath& path) { return stat_from_json(call("stat", {{"path", path.str()}})); }

Guid CatalogueClient::mint_guid(const LfnPath& lfn) {
  return Guid::parse(call("mint_guid", {{"lfn", lfn.str()}}).get<std::string>());
}

bool CatalogueClient::is_pending(const LfnPath& lfn, const Guid& guid) {
  return call("is_pending", {{"lfn", lfn.str()}, {"guid", guid.to_string()}}).get<bool>();
}

void CatalogueClient::put_inline(const LfnPath& lfn, const std::string& content, PermissionBits perms) {
  call_raw("put_inline", {{"lfn", lfn.str()}, {"perms", perms.to_octal()}}, content);
}

std::string CatalogueClient::read_inline(const LfnPath& lfn) {
  return call_raw("read_inline", {{"lfn", lfn.str()}}).data;
}

}  // namespace gridfs::catalogue
