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
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace gridfs::storage {

// Byte-budgeted local file cache with LRU eviction. Entries are pinned while
// a Lease is alive and are never evicted while pinned; a file larger than
// the budget is served once and dropped when its last lease goes.
class DiskCache {
 public:
  using Producer = std::function<void(const std::filesystem::path& dest)>;

  class Lease;

  DiskCache(std::filesystem::path dir, std::uint64_t budget_bytes);
  ~DiskCache();

  // Returns the cached file for `key`, invoking `producer` to create it on a
  // miss. A throwing producer caches nothing and raises ProducerFailure
  // (an Error thrown by the producer keeps its code).
  Lease get_or_pull(const std::string& key, const Producer& producer);

  bool contains(const std::string& key) const;
  void erase(const std::string& key);

  std::uint64_t bytes() const;
  std::uint64_t budget() const noexcept { return budget_; }
  std::uint64_t pulls() const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  struct Node {
    std::string key;
    std::filesystem::path path;
    std::uint64_t size = 0;
    int pins = 0;
    bool indexed = false;  // present in entries_ and counted in bytes_
    std::list<std::string>::iterator lru;
  };

  void unpin(const std::shared_ptr<Node>& node);
  void evict_for(std::uint64_t incoming);
  void unindex(Node& node);

  std::filesystem::path dir_;
  std::uint64_t budget_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Node>> entries_;
  std::list<std::string> lru_;  // front = most recent
  std::uint64_t bytes_ = 0;
  std::uint64_t pulls_ = 0;
  std::uint64_t next_file_ = 0;
};

class DiskCache::Lease {
 public:
  Lease() = default;
  Lease(Lease&& other) noexcept = default;
  Lease& operator=(Lease&& other) noexcept;
  Lease(const Lease&) = delete;
  Lease& operator=(const Lease&) = delete;
  ~Lease() { reset(); }

  const std::filesystem::path& path() const noexcept { return node_->path; }
  std::uint64_t size() const noexcept { return node_->size; }
  explicit operator bool() const noexcept { return node_ != nullptr; }
  void reset();

 private:
  friend class DiskCache;
  Lease(DiskCache* cache, std::shared_ptr<Node> node) : cache_(cache), node_(std::move(node)) {}

  DiskCache* cache_ = nullptr;
  std::shared_ptr<Node> node_;
};

}  // namespace gridfs::storage
