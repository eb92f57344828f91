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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gridfs/common/guid.hpp"
#include "gridfs/storage/disk_cache.hpp"
#include "gridfs/storage/lvm.hpp"
#include "gridfs/storage/plugin.hpp"

namespace gridfs::storage {

struct SeConfig {
  std::string se_name;
  std::string plugin = "file";
  std::string listen;  // host:port, also the PFN authority
  std::string site;
  std::filesystem::path cache_dir;
  std::uint64_t cache_budget_bytes = 256ull << 20;
  std::vector<VolumeSpec> volumes;

  static SeConfig from_json(const json& j);
  json to_json() const;
};

struct Allocation {
  Pfn pfn;
  std::string volume_id;
  std::string token;  // proves ownership of the in-flight PFN
};

struct ResyncReport {
  std::uint64_t added = 0;
  std::uint64_t removed = 0;
  std::uint64_t size_corrected = 0;

  json to_json() const;
  friend bool operator==(const ResyncReport&, const ResyncReport&) = default;
};

// A storage element: plugin backend, logical volume manager, upload staging
// and a local read cache. Thread-safe.
class StorageElement {
 public:
  using Clock = std::function<std::int64_t()>;  // integer seconds

  StorageElement(SeConfig config, Clock clock);
  ~StorageElement();

  const SeConfig& config() const noexcept { return config_; }

  // Picks a volume and reserves size_hint bytes there. `guid` names the
  // stored file; a random one is drawn when absent.
  Allocation allocate_pfn(std::uint64_t size_hint, std::optional<Guid> guid = std::nullopt);
  // Streams bytes into the upload; offset must equal the bytes staged so far.
  void append(const Pfn& pfn, const std::string& token, std::uint64_t offset, std::string_view data);
  void sync(const Pfn& pfn, const std::string& token);
  // Moves the staged bytes into the store and records the placement.
  std::uint64_t commit(const Pfn& pfn, const std::string& token, std::optional<std::uint64_t> expected_size);
  void abort(const Pfn& pfn, const std::string& token);
  // One-shot append + commit.
  std::uint64_t store_file(const Pfn& pfn, const std::string& token, std::string_view data);

  std::string fetch_file(const Pfn& pfn, std::uint64_t offset, std::uint64_t length);
  // Committed size, or the staged byte count of an in-flight upload.
  std::uint64_t size_of(const Pfn& pfn);
  void rm(const Pfn& pfn);

  std::vector<std::string> expire_files(std::int64_t now_s);
  std::vector<std::string> expire_files() { return expire_files(clock_()); }
  ResyncReport resync();

  // Local cache of whole files keyed by GUID.
  std::filesystem::path cache_get_or_pull(const Guid& guid, const DiskCache::Producer& producer);

  std::vector<Volume> volumes() const;
  std::map<std::string, Placement> placements() const;
  std::vector<StoredFile> lslist();
  SePlugin& plugin() noexcept { return *plugin_; }
  DiskCache& cache() noexcept { return *cache_; }
  std::size_t in_flight() const;

  // Stored path ("/mount/ab/guid") of a PFN issued by this element.
  std::string stored_path(const Pfn& pfn) const;

 private:
  struct Upload {
    std::string token;
    std::string volume_id;
    std::uint64_t reserved = 0;
    std::uint64_t staged = 0;
    std::filesystem::path staging;
  };

  Upload& upload_for(const std::string& path, const std::string& token);
  void finish_upload(const std::string& path);
  std::uint64_t volume_bytes_on_disk(const std::string& mount_point);

  SeConfig config_;
  Clock clock_;
  std::string host_;
  std::uint16_t port_ = 0;
  std::unique_ptr<SePlugin> plugin_;
  std::unique_ptr<DiskCache> cache_;
  std::unique_ptr<DiskCache> guid_cache_;
  std::filesystem::path staging_dir_;

  mutable std::mutex mu_;
  Lvm lvm_;
  std::map<std::string, Upload> uploads_;
  std::mt19937_64 rng_;
  std::uint64_t next_token_ = 0;
};

}  // namespace gridfs::storage
