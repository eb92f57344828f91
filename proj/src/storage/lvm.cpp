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

#include "gridfs/storage/lvm.hpp"

#include "gridfs/common/error.hpp"

namespace gridfs::storage {

VolumeSpec VolumeSpec::from_json(const json& j) {
  VolumeSpec v;
  v.id = j.at("id").get<std::string>();
  v.mount_point = j.at("mount_point").get<std::string>();
  v.capacity = j.at("capacity_bytes").get<std::uint64_t>();
  if (j.contains("lifetime_s")) {
    const auto& l = j["lifetime_s"];
    if (l.is_string()) {
      if (l.get<std::string>() != "infinite") fail(Errc::InvalidArgument, "lifetime_s must be seconds or \"infinite\"");
    } else {
      v.lifetime_s = l.get<std::int64_t>();
      if (*v.lifetime_s < 0) fail(Errc::InvalidArgument, "negative lifetime");
    }
  }
  if (v.id.empty()) fail(Errc::InvalidArgument, "volume without id");
  return v;
}

json VolumeSpec::to_json() const {
  json j = {{"id", id}, {"mount_point", mount_point}, {"capacity_bytes", capacity}};
  j["lifetime_s"] = lifetime_s ? json(*lifetime_s) : json("infinite");
  return j;
}

Lvm::Lvm(std::vector<VolumeSpec> specs) {
  if (specs.empty()) fail(Errc::InvalidArgument, "a storage element needs at least one volume");
  for (auto& s : specs) {
    auto id = s.id;
    if (!volumes_.emplace(id, Volume{std::move(s)}).second) fail(Errc::InvalidArgument, "duplicate volume id " + id);
  }
}

const Volume& Lvm::pick(std::uint64_t size_hint) const {
  const Volume* best = nullptr;
  for (const auto& [id, v] : volumes_) {
    // map order gives the smallest id first among equals
    if (best == nullptr || v.free_bytes() > best->free_bytes()) best = &v;
  }
  if (best->free_bytes() < size_hint) {
    fail(Errc::NoSpace, "no volume has " + std::to_string(size_hint) + " free bytes");
  }
  return *best;
}

Volume& Lvm::mutable_volume(const std::string& id) {
  auto it = volumes_.find(id);
  if (it == volumes_.end()) fail(Errc::NotFound, "no volume " + id);
  return it->second;
}

const Volume& Lvm::volume(const std::string& id) const { return const_cast<Lvm*>(this)->mutable_volume(id); }

void Lvm::reserve(const std::string& volume_id, std::uint64_t bytes) {
  Volume& v = mutable_volume(volume_id);
  if (v.free_bytes() < bytes) fail(Errc::NoSpace, "volume " + volume_id + " is full");
  v.reserved += bytes;
}

void Lvm::release(const std::string& volume_id, std::uint64_t bytes) {
  Volume& v = mutable_volume(volume_id);
  v.reserved -= std::min(v.reserved, bytes);
}

void Lvm::place(const std::string& path, const std::string& volume_id, std::uint64_t bytes, std::int64_t now_s) {
  Volume& v = mutable_volume(volume_id);
  if (bytes > v.free_bytes()) {
    fail(Errc::QuotaExceeded, std::to_string(bytes) + " bytes exceed the " + std::to_string(v.free_bytes()) +
                                  " free on volume " + volume_id);
  }
  if (placements_.count(path)) fail(Errc::AlreadyExists, path);
  std::optional<std::int64_t> expiry;
  if (v.spec.lifetime_s) expiry = now_s + *v.spec.lifetime_s;
  placements_[path] = {volume_id, bytes, expiry};
  v.used += bytes;
}

bool Lvm::unplace(const std::string& path) {
  auto it = placements_.find(path);
  if (it == placements_.end()) return false;
  Volume& v = mutable_volume(it->second.volume_id);
  v.used -= std::min(v.used, it->second.bytes);
  placements_.erase(it);
  return true;
}

void Lvm::adopt(const std::string& path, const std::string& volume_id, std::uint64_t bytes, std::int64_t now_s) {
  auto it = placements_.find(path);
  if (it != placements_.end()) {
    it->second.bytes = bytes;
    return;
  }
  const Volume& v = mutable_volume(volume_id);
  std::optional<std::int64_t> expiry;
  if (v.spec.lifetime_s) expiry = now_s + *v.spec.lifetime_s;
  placements_[path] = {volume_id, bytes, expiry};
}

std::vector<std::string> Lvm::expired(std::int64_t now_s) const {
  std::vector<std::string> out;
  for (const auto& [path, p] : placements_) {
    if (p.expiry_s && *p.expiry_s <= now_s) out.push_back(path);
  }
  return out;
}

const Volume* Lvm::volume_for_path(const std::string& path) const {
  for (const auto& [id, v] : volumes_) {
    const auto& m = v.spec.mount_point;
    if (path.size() > m.size() && path.compare(0, m.size(), m) == 0 && path[m.size()] == '/') return &v;
  }
  return nullptr;
}

std::optional<Placement> Lvm::placement(const std::string& path) const {
  auto it = placements_.find(path);
  if (it == placements_.end()) return std::nullopt;
  return it->second;
}

std::vector<Volume> Lvm::volumes() const {
  std::vector<Volume> out;
  for (const auto& [id, v] : volumes_) out.push_back(v);
  return out;
}

void Lvm::recompute_used() {
  for (auto& [id, v] : volumes_) v.used = 0;
  for (const auto& [path, p] : placements_) mutable_volume(p.volume_id).used += p.bytes;
}

}  // namespace gridfs::storage
