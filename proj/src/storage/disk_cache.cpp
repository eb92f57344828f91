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

#include "gridfs/storage/disk_cache.hpp"

#include "gridfs/common/error.hpp"

namespace gridfs::storage {
namespace fs = std::filesystem;

DiskCache::Lease& DiskCache::Lease::operator=(Lease&& other) noexcept {
  if (this != &other) {
    reset();
    cache_ = other.cache_;
    node_ = std::move(other.node_);
  }
  return *this;
}

void DiskCache::Lease::reset() {
  if (node_ != nullptr) cache_->unpin(node_);
  node_.reset();
}

DiskCache::DiskCache(fs::path dir, std::uint64_t budget_bytes) : dir_(std::move(dir)), budget_(budget_bytes) {
  fs::create_directories(dir_);
  // Leftovers from an earlier process are unknown to the index.
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (e.is_regular_file() && e.path().extension() == ".cached") fs::remove(e.path());
  }
}

DiskCache::~DiskCache() {
  std::lock_guard lock(mu_);
  for (const auto& [key, node] : entries_) {
    std::error_code ec;
    fs::remove(node->path, ec);
  }
}

DiskCache::Lease DiskCache::get_or_pull(const std::string& key, const Producer& producer) {
  std::lock_guard lock(mu_);
  if (auto it = entries_.find(key); it != entries_.end()) {
    auto& node = it->second;
    lru_.splice(lru_.begin(), lru_, node->lru);
    ++node->pins;
    return Lease(this, node);
  }

  fs::path dest = dir_ / ("c" + std::to_string(next_file_++) + ".cached");
  ++pulls_;
  try {
    producer(dest);
  } catch (const Error&) {
    std::error_code ec;
    fs::remove(dest, ec);
    throw;
  } catch (const std::exception& ex) {
    std::error_code ec;
    fs::remove(dest, ec);
    fail(Errc::ProducerFailure, std::string("cache producer failed: ") + ex.what());
  }
  std::error_code ec;
  std::uint64_t size = fs::file_size(dest, ec);
  if (ec) fail(Errc::ProducerFailure, "cache producer did not create " + dest.string());

  auto node = std::make_shared<Node>();
  node->key = key;
  node->path = dest;
  node->size = size;
  node->pins = 1;
  evict_for(size);
  if (bytes_ + size <= budget_) {
    lru_.push_front(key);
    node->lru = lru_.begin();
    node->indexed = true;
    bytes_ += size;
    entries_[key] = node;
  }
  return Lease(this, std::move(node));
}

void DiskCache::evict_for(std::uint64_t incoming) {
  auto it = lru_.end();
  while (bytes_ + incoming > budget_ && it != lru_.begin()) {
    --it;
    auto node = entries_.at(*it);
    if (node->pins > 0) continue;
    ++it;  // unindex erases the current position
    unindex(*node);
    std::error_code ec;
    fs::remove(node->path, ec);
  }
}

void DiskCache::unindex(Node& node) {
  if (!node.indexed) return;
  node.indexed = false;
  bytes_ -= node.size;
  lru_.erase(node.lru);
  entries_.erase(node.key);
}

void DiskCache::unpin(const std::shared_ptr<Node>& node) {
  std::lock_guard lock(mu_);
  if (--node->pins == 0 && !node->indexed) {
    std::error_code ec;
    fs::remove(node->path, ec);
  }
}

bool DiskCache::contains(const std::string& key) const {
  std::lock_guard lock(mu_);
  return entries_.count(key) > 0;
}

void DiskCache::erase(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return;
  auto node = it->second;
  unindex(*node);
  if (node->pins == 0) {
    std::error_code ec;
    fs::remove(node->path, ec);
  }
}

std::uint64_t DiskCache::bytes() const {
  std::lock_guard lock(mu_);
  return bytes_;
}

std::uint64_t DiskCache::pulls() const {
  std::lock_guard lock(mu_);
  return pulls_;
}

}  // namespace gridfs::storage
