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
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gridfs/aiod/channel.hpp"
#include "gridfs/catalogue/service.hpp"
#include "gridfs/storage/service.hpp"

namespace gridfs::access {

using catalogue::LfnPath;
using catalogue::PermissionBits;
using catalogue::Pfn;

enum class OpenMode { kRead, kWriteOnce };
enum class AccessStrategy { kRemotePartial, kWholeFileLocal };

std::string_view to_string(OpenMode mode) noexcept;
std::string_view to_string(AccessStrategy strategy) noexcept;

struct ClientConfig {
  wire::Address self = "client";
  wire::Address catalogue_addr;
  std::string default_se;
  std::string site;
  std::filesystem::path cache_dir;
  std::string route;  // default route text; empty means direct SE access
  std::string token;
  std::string credential_ref;  // empty means /<user>/.credential
  storage::SeDirectory ses;
  int max_redirects = 4;

  // Keys: self, catalogue_addr, default_se, site, cache_dir, route, token,
  // credential_ref, ses, max_redirects.
  static ClientConfig from_json(const json& j);
};

// "<lfn>@<se>" split at the last '@'. The LFN part may not contain '@'.
std::pair<std::string, std::optional<std::string>> split_se_suffix(std::string_view target);

struct ReplicaSite {
  Pfn pfn;
  std::string site;
};

// First replica at the client's site, else the master (first entry).
Pfn select_best_replica(const std::vector<ReplicaSite>& replicas, std::string_view client_site);

struct OpenOptions {
  // Cache route; nullopt takes the configured default, an empty chain means
  // direct access.
  std::optional<aiod::RouteChain> route;
  aiod::AccessKind access = aiod::AccessKind::kSequential;
  std::uint64_t size_hint = 0;
  PermissionBits perms{0644};
};

struct HandleInfo {
  int id = 0;
  LfnPath lfn;
  Guid guid;
  OpenMode mode = OpenMode::kRead;
  AccessStrategy strategy = AccessStrategy::kRemotePartial;
  Pfn pfn;
  std::string endpoint;  // first server on the data path
  std::uint64_t size = 0;
  std::uint64_t next_offset = 0;
};

struct FileHandle;

// Open handles by id. Ids grow monotonically and are never reused.
class OpenFileTable {
 public:
  int insert(std::shared_ptr<FileHandle> handle);
  std::shared_ptr<FileHandle> get(int id) const;   // throws BadHandle
  std::shared_ptr<FileHandle> take(int id);        // removes; throws BadHandle
  std::vector<int> ids() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<int, std::shared_ptr<FileHandle>> handles_;
  int next_id_ = 1;
};

// Grid file API: open / read / write / sync / close over the open file
// table. Safe for concurrent use; one thread at a time per handle.
class GridClient {
 public:
  GridClient(wire::Network& net, ClientConfig config);
  ~GridClient();

  GridClient(const GridClient&) = delete;
  GridClient& operator=(const GridClient&) = delete;

  int open(std::string_view target, OpenMode mode, AccessStrategy strategy, const OpenOptions& options = {});
  std::string read(int handle, std::uint64_t offset, std::uint64_t size);
  std::uint64_t write(int handle, std::uint64_t offset, std::string_view data);
  void sync(int handle);
  void close(int handle);
  // Drops the handle without committing or registering anything.
  void abort(int handle);

  HandleInfo info(int handle) const;
  std::vector<int> open_handles() const { return table_.ids(); }

  // Stores the session token at the credential path unless present.
  void publish_credential();
  std::string credential_ref();

  catalogue::CatalogueClient& catalogue() noexcept { return catalogue_; }
  const storage::SeDirectory& ses() const noexcept { return config_.ses; }
  const ClientConfig& config() const noexcept { return config_; }
  wire::Network& network() noexcept { return net_; }
  std::string site_of(const Pfn& pfn) const;

 private:
  aiod::RouteChain route_for(const OpenOptions& options) const;
  aiod::AccessTicket ticket_for(const LfnPath& lfn, const Guid& guid, const aiod::RouteChain& route);
  std::unique_ptr<aiod::DataChannel> open_read_channel(const LfnPath& lfn, const catalogue::Resolved& r,
                                                       const std::optional<std::string>& se,
                                                       const aiod::RouteChain& route, const OpenOptions& options);
  std::filesystem::path stage_whole_file(const Guid& guid, std::uint64_t size, aiod::DataChannel& channel);

  wire::Network& net_;
  ClientConfig config_;
  catalogue::CatalogueClient catalogue_;
  OpenFileTable table_;
};

// Copies a grid file to a local path through an optional route; returns bytes.
std::uint64_t aioget(GridClient& client, std::string_view lfn, const std::filesystem::path& local,
                     const std::optional<aiod::RouteChain>& route = std::nullopt);
// Copies a local file to <lfn>[@SE] through an optional route; returns bytes.
std::uint64_t aioput(GridClient& client, const std::filesystem::path& local, std::string_view target,
                     const std::optional<aiod::RouteChain>& route = std::nullopt);

}  // namespace gridfs::access
