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

#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "gridfs/catalogue/catalogue.hpp"
#include "gridfs/wire/network.hpp"

namespace gridfs::catalogue {

// Shared-token authentication: each token names one principal.
class AuthTable {
 public:
  void add(std::string token, Principal who);
  // Throws Error(Unauthenticated) for unknown tokens.
  Principal lookup(std::string_view token) const;
  bool empty() const noexcept { return users_.empty(); }

  // [{"user":..., "groups":[...], "token":...}]
  static AuthTable from_json(const json& users);

 private:
  std::map<std::string, Principal, std::less<>> users_;
};

json to_json(const Resolved& r);
Resolved resolved_from_json(const json& j);
json to_json(const DirEntry& e);
DirEntry dir_entry_from_json(const json& j);
json to_json(const Stat& s);
Stat stat_from_json(const json& j);

// Exposes a Catalogue over the wire protocol.
class CatalogueService : public wire::Service {
 public:
  CatalogueService(Catalogue& catalogue, const AuthTable& auth);

  wire::Message handle(const wire::Address& caller, const wire::Message& request) override;

 private:
  Catalogue& catalogue_;
  const AuthTable& auth_;
  wire::Dispatcher dispatch_;
};

// Client stub. Authenticates once on first use; after a transport failure
// the next call re-authenticates transparently.
class CatalogueClient {
 public:
  CatalogueClient(wire::Network& net, wire::Address self, wire::Address catalogue, std::string token);

  const Principal& whoami();
  const std::string& token() const noexcept { return token_; }
  const wire::Address& address() const noexcept { return catalogue_; }
  bool connected() const noexcept { return connected_; }
  std::uint64_t reconnects() const noexcept { return reconnects_; }

  void mkdir(const LfnPath& path, PermissionBits perms);
  void register_file(const LfnPath& lfn, const Pfn& pfn, std::uint64_t size, const Guid& guid, PermissionBits perms);
  Resolved resolve(const LfnPath& lfn);
  void add_replica(const LfnPath& lfn, const Pfn& pfn, std::uint64_t observed_size);
  void remove_replica(const LfnPath& lfn, const Pfn& pfn);
  std::vector<Pfn> remove(const LfnPath& lfn);
  void move(const LfnPath& from, const LfnPath& to);
  void set_access(const LfnPath& path, const std::optional<std::string>& owner,
                  const std::optional<std::string>& group, const std::optional<PermissionBits>& perms);
  std::string read_metadata(const LfnPath& lfn);
  void set_metadata(const LfnPath& lfn, const std::string& name, const std::string& value);
  std::vector<DirEntry> list_dir(const LfnPath& dir);
  Stat stat(const LfnPath& path);
  Guid mint_guid(const LfnPath& lfn);
  bool is_pending(const LfnPath& lfn, const Guid& guid);
  void put_inline(const LfnPath& lfn, const std::string& content, PermissionBits perms);
  std::string read_inline(const LfnPath& lfn);

 private:
  wire::Reply call_raw(std::string_view op, json args, std::string data = {});
  json call(std::string_view op, json args);
  void authenticate();

  wire::Network& net_;
  wire::Address self_;
  wire::Address catalogue_;
  std::string token_;
  std::mutex mu_;
  bool connected_ = false;
  std::uint64_t reconnects_ = 0;
  std::optional<Principal> principal_;
};

}  // namespace gridfs::catalogue
