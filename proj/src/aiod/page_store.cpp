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

#include "gridfs/aiod/page_store.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "gridfs/common/error.hpp"

namespace gridfs::aiod {
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSnapshotEvery = 4096;

json key_json(const PageKey& k) { return {{"guid", k.guid.to_string()}, {"offset", k.offset}, {"length", k.length}}; }

PageKey key_from_json(const json& j) {
  return {Guid::parse(j.at("guid").get<std::string>()), j.at("offset").get<std::uint64_t>(),
          j.at("length").get<std::uint64_t>()};
}

}  // namespace

PageStore::PageStore(fs::path dir, std::uint64_t budget_bytes)
    : dir_(std::move(dir)), budget_(budget_bytes), journal_((fs::create_directories(dir_), dir_ / "index.journal")) {
  restore();
}

fs::path PageStore::file_for(const PageKey& key) const {
  return dir_ / (key.guid.to_string() + "." + std::to_string(key.offset) + "." + std::to_string(key.length) + ".page");
}

void PageStore::restore() {
  // Replay into an ordered list, most recent last.
  std::map<PageKey, std::uint64_t> live;
  std::uint64_t order = 0;
  std::uint64_t after = 0;
  if (auto snap = journal_.read_snapshot()) {
    after = snap->seq;
    for (const auto& line : snap->lines) live[key_from_json(line)] = order++;
  }
  for (const auto& r : journal_.records_after(after)) {
    auto key = key_from_json(r);
    if (r.at("op") == "put") {
      live[key] = order++;
    } else {
      live.erase(key);
    }
  }
  std::vector<std::pair<std::uint64_t, PageKey>> ordered;
  for (const auto& [key, n] : live) {
    std::error_code ec;
    if (fs::file_size(file_for(key), ec) == key.length && !ec) ordered.emplace_back(n, key);
  }
  std::sort(ordered.begin(), ordered.end());
  for (const auto& [n, key] : ordered) index_locked(key);
  std::set<fs::path> known;
  for (const auto& k : lru_) known.insert(file_for(k));
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (e.path().extension() == ".page" && known.count(e.path()) == 0) fs::remove(e.path());
  }
  while (bytes_ > budget_ && !lru_.empty()) drop_locked(lru_.back(), true);
  std::vector<json> lines;
  for (auto it = lru_.rbegin(); it != lru_.rend(); ++it) lines.push_back(key_json(*it));
  journal_.write_snapshot(lines);
}

void PageStore::index_locked(const PageKey& key) {
  lru_.push_front(key);
  index_[key.guid][key.offset] = Entry{key.length, lru_.begin()};
  bytes_ += key.length;
}

void PageStore::log(const char* op, const PageKey& key) {
  json r = key_json(key);
  r["op"] = op;
  journal_.append(std::move(r));
  if (++log_records_ % kSnapshotEvery == 0) {
    std::vector<json> lines;
    for (auto it = lru_.rbegin(); it != lru_.rend(); ++it) lines.push_back(key_json(*it));
    journal_.write_snapshot(lines);
  }
}

const PageKey* PageStore::covering(const Guid& guid, std::uint64_t offset, std::uint64_t length) const {
  auto g = index_.find(guid);
  if (g == index_.end()) return nullptr;
  auto it = g->second.upper_bound(offset);
  if (it == g->second.begin()) return nullptr;
  --it;
  if (it->first + it->second.length < offset + length) return nullptr;
  return &*it->second.lru;
}

std::string PageStore::read_locked(const PageKey& key, std::uint64_t offset, std::uint64_t length) {
  auto& entry = index_.at(key.guid).at(key.offset);
  lru_.splice(lru_.begin(), lru_, entry.lru);
  std::ifstream in(file_for(key), std::ios::binary);
  in.seekg(static_cast<std::streamoff>(offset - key.offset));
  std::string out(length, '\0');
  in.read(out.data(), static_cast<std::streamsize>(length));
  if (static_cast<std::uint64_t>(in.gcount()) != length) fail(Errc::BackendFailure, "short page read");
  return out;
}

std::optional<std::string> PageStore::lookup(const Guid& guid, std::uint64_t offset, std::uint64_t length) {
  std::lock_guard lock(mu_);
  const PageKey* k = covering(guid, offset, length);
  if (k == nullptr) return std::nullopt;
  return read_locked(*k, offset, length);
}

void PageStore::drop_locked(const PageKey& key, bool remove_file) {
  auto g = index_.find(key.guid);
  auto it = g->second.find(key.offset);
  bytes_ -= it->second.length;
  lru_.erase(it->second.lru);
  g->second.erase(it);
  if (g->second.empty()) index_.erase(g);
  if (remove_file) {
    std::error_code ec;
    fs::remove(file_for(key), ec);
  }
}

void PageStore::insert_locked(const Guid& guid, std::uint64_t offset, const std::string& data) {
  const std::uint64_t length = data.size();
  if (length == 0 || length > budget_ || covering(guid, offset, length) != nullptr) return;
  // Replace contained pages.
  if (auto g = index_.find(guid); g != index_.end()) {
    std::vector<PageKey> inside;
    for (auto it = g->second.lower_bound(offset); it != g->second.end() && it->first < offset + length; ++it) {
      if (it->first + it->second.length <= offset + length) inside.push_back({guid, it->first, it->second.length});
    }
    for (const auto& k : inside) {
      drop_locked(k, true);
      log("drop", k);
    }
  }
  while (bytes_ + length > budget_ && !lru_.empty()) {
    PageKey victim = lru_.back();
    drop_locked(victim, true);
    log("drop", victim);
  }
  PageKey key{guid, offset, length};
  const fs::path tmp = dir_ / (".incoming." + std::to_string(offset));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(length));
    if (!out) fail(Errc::BackendFailure, "cannot write page " + file_for(key).string());
  }
  fs::rename(tmp, file_for(key));
  index_locked(key);
  log("put", key);
}

void PageStore::insert(const Guid& guid, std::uint64_t offset, const std::string& data) {
  std::lock_guard lock(mu_);
  insert_locked(guid, offset, data);
}

std::string PageStore::get_or_fetch(const Guid& guid, std::uint64_t offset, std::uint64_t length,
                                    const Fetcher& fetch, bool* hit) {
  std::unique_lock lock(mu_);
  const PageKey want{guid, offset, length};
  while (true) {
    if (const PageKey* k = covering(guid, offset, length)) {
      if (hit != nullptr) *hit = true;
      return read_locked(*k, offset, length);
    }
    auto it = in_flight_.find(want);
    if (it == in_flight_.end()) break;
    auto pending = it->second;
    cv_.wait(lock, [&] { return pending->done; });
    if (pending->error) std::rethrow_exception(pending->error);
    if (hit != nullptr) *hit = true;
    return pending->data;
  }

  auto pending = std::make_shared<InFlight>();
  in_flight_[want] = pending;
  lock.unlock();
  std::string data;
  std::exception_ptr error;
  try {
    data = fetch();
    if (data.size() != length) fail(Errc::BackendFailure, "next hop returned a short page");
  } catch (...) {
    error = std::current_exception();
  }
  lock.lock();
  if (!error) {
    try {
      insert_locked(guid, offset, data);
    } catch (...) {
      error = std::current_exception();
    }
  }
  pending->done = true;
  pending->error = error;
  pending->data = data;
  in_flight_.erase(want);
  cv_.notify_all();
  if (error) std::rethrow_exception(error);
  if (hit != nullptr) *hit = false;
  return data;
}

bool PageStore::holds(const Guid& guid) const {
  std::lock_guard lock(mu_);
  return index_.count(guid) > 0;
}

std::vector<PageKey> PageStore::pages() const {
  std::lock_guard lock(mu_);
  std::vector<PageKey> out;
  for (const auto& [guid, pages] : index_) {
    for (const auto& [off, e] : pages) out.push_back({guid, off, e.length});
  }
  return out;
}

std::string PageStore::page_data(const PageKey& key) const {
  std::lock_guard lock(mu_);
  std::ifstream in(file_for(key), std::ios::binary);
  if (!in) fail(Errc::NotFound, "page not cached");
  return {std::istreambuf_iterator<char>(in), {}};
}

std::uint64_t PageStore::bytes() const {
  std::lock_guard lock(mu_);
  return bytes_;
}

}  // namespace gridfs::aiod
