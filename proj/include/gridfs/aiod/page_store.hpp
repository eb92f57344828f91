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

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gridfs/common/guid.hpp"
#include "gridfs/common/journal.hpp"

namespace gridfs::aiod {

struct PageKey {
  Guid guid;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  friend auto operator<=>(const PageKey&, const PageKey&) = default;
};

// GUID-keyed page cache on disk. Each page is a file
// <guid>.<offset>.<length>.page; an index journal in the same directory
// restores the index and LRU order after a restart.
//
// A request is answered by any cached page covering the requested range.
// Pages of one GUID never overlap: a new page that contains smaller cached
// pages replaces them.
class PageStore {
 public:
  using Fetcher = std::function<std::string()>;

  PageStore(std::filesystem::path dir, std::uint64_t budget_bytes);

  // Bytes [offset, offset + length) of `guid`. On a miss `fetch` runs once
  // for all concurrent callers asking for the same range and its result is
  // stored. `hit` reports whether the cache answered.
  std::string get_or_fetch(const Guid& guid, std::uint64_t offset, std::uint64_t length, const Fetcher& fetch,
                           bool* hit = nullptr);

  std::optional<std::string> lookup(const Guid& guid, std::uint64_t offset, std::uint64_t length);
  void insert(const Guid& guid, std::uint64_t offset, const std::string& data);

  bool holds(const Guid& guid) const;
  std::vector<PageKey> pages() const;
  // Raw page bytes as stored; used for coherence checks.
  std::string page_data(const PageKey& key) const;

  std::uint64_t bytes() const;
  std::uint64_t budget() const noexcept { return budget_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  struct Entry {
    std::uint64_t length = 0;
    std::list<PageKey>::iterator lru;
  };
  struct InFlight {
    bool done = false;
    std::string data;
    std::exception_ptr error;
  };

  std::filesystem::path file_for(const PageKey& key) const;
  // Locked helpers.
  const PageKey* covering(const Guid& guid, std::uint64_t offset, std::uint64_t length) const;
  std::string read_locked(const PageKey& key, std::uint64_t offset, std::uint64_t length);
  void insert_locked(const Guid& guid, std::uint64_t offset, const std::string& data);
  void drop_locked(const PageKey& key, bool remove_file);
  void index_locked(const PageKey& key);
  void log(const char* op, const PageKey& key);
  void restore();

  std::filesystem::path dir_;
  std::uint64_t budget_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<Guid, std::map<std::uint64_t, Entry>> index_;
  std::list<PageKey> lru_;  // most recent first
  std::uint64_t bytes_ = 0;
  std::map<PageKey, std::shared_ptr<InFlight>> in_flight_;
  Journal journal_;
  std::uint64_t log_records_ = 0;
};

}  // namespace gridfs::aiod
