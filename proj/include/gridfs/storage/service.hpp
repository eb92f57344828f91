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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gridfs/catalogue/service.hpp"
#include "gridfs/storage/storage_element.hpp"
#include "gridfs/wire/network.hpp"

namespace gridfs::storage {

// Name, network address and site label of one storage element.
struct SeInfo {
  std::string name;
  wire::Address address;
  std::string site;
};

class SeDirectory {
 public:
  void add(SeInfo info);
  // Throws UnknownSe.
  const SeInfo& by_name(std::string_view name) const;
  // SE whose address equals the PFN endpoint, if any.
  const SeInfo* by_endpoint(std::string_view endpoint) const;
  const std::vector<SeInfo>& all() const noexcept { return ses_; }

  // [{"name":..., "address":..., "site":...}]
  static SeDirectory from_json(const json& j);
  json to_json() const;

 private:
  std::vector<SeInfo> ses_;
};

// Storage element wire service. Ops: allocate, append, sync, commit, abort,
// store, fetch, sizeof, lslist, rm, expire, resync, volumes, info.
class SeService : public wire::Service {
 public:
  // Returning an error code makes the named op fail with it.
  using FaultHook = std::function<std::optional<Errc>(std::string_view op)>;

  // `auth` may be null, which disables token checks.
  SeService(StorageElement& se, const catalogue::AuthTable* auth);

  wire::Message handle(const wire::Address& caller, const wire::Message& request) override;
  void set_fault_hook(FaultHook hook) { fault_hook_ = std::move(hook); }

 private:
  StorageElement& se_;
  const catalogue::AuthTable* auth_;
  FaultHook fault_hook_;
  wire::Dispatcher dispatch_;
};

class SeClient {
 public:
  SeClient(wire::Network& net, wire::Address self, wire::Address se, std::string token);

  const wire::Address& address() const noexcept { return se_; }

  Allocation allocate(std::uint64_t size_hint, std::optional<Guid> guid = std::nullopt);
  void append(const Pfn& pfn, const std::string& upload, std::uint64_t offset, std::string data);
  void sync(const Pfn& pfn, const std::string& upload);
  std::uint64_t commit(const Pfn& pfn, const std::string& upload, std::optional<std::uint64_t> expected_size);
  void abort(const Pfn& pfn, const std::string& upload);
  std::uint64_t store(const Pfn& pfn, const std::string& upload, std::string data);
  std::string fetch(const Pfn& pfn, std::uint64_t offset, std::uint64_t length);
  std::uint64_t size_of(const Pfn& pfn);
  std::vector<StoredFile> lslist();
  void rm(const Pfn& pfn);
  std::vector<std::string> expire(std::optional<std::int64_t> now_s = std::nullopt);
  ResyncReport resync();
  json volumes();
  json info();

 private:
  wire::Reply call(std::string_view op, json args, std::string data = {});

  wire::Network& net_;
  wire::Address self_;
  wire::Address se_;
  std::string token_;
};

}  // namespace gridfs::storage
