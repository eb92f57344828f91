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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gridfs::storage {

using json = nlohmann::json;

struct VolumeSpec {
  std::string id;
  std::string mount_point;
  std::uint64_t capacity = 0;
  std::optional<std::int64_t> lifetime_s;  // nullopt = infinite

  static VolumeSpec from_json(const json& j);
  json to_json() const;
};

struct Volume {
  VolumeSpec spec;
  std::uint64_t used = 0;
  std::uint64_t reserved = 0;

  std::uint64_t free_bytes() const noexcept {
    std::uint64_t taken = used + reserved;
    return taken >= spec.capacity ? 0 : spec.capacity - taken;
  }
};

struct Placement {
  std::string volume_id;
  std::uint64_t bytes = 0;
  std::optional<std::int64_t> expiry_s;
};

// Bookkeeping half of the logical volume manager. Not synchronized; the
// owning storage element serializes access.
class Lvm {
 public:
  explicit Lvm(std::vector<VolumeSpec> specs);

  // Volume with the most free bytes (ties: smallest id) that can hold
  // size_hint; throws NoSpace.
  const Volume& pick(std::uint64_t size_hint) const;
  void reserve(const std::string& volume_id, std::uint64_t bytes);
  void release(const std::string& volume_id, std::uint64_t bytes);

  // Records a committed file. Throws QuotaExceeded when `bytes` exceeds the
  // volume's free space (reservations of other uploads included).
  void place(const std::string& path, const std::string& volume_id, std::uint64_t bytes, std::int64_t now_s);
  // Drops a placement; returns false if unknown.
  bool unplace(const std::string& path);
  // Adopts or corrects a placement without quota checks (resync).
  void adopt(const std::string& path, const std::string& volume_id, std::uint64_t bytes, std::int64_t now_s);

  std::vector<std::string> expired(std::int64_t now_s) const;
  // Volume whose mount point prefixes `path`, or nullptr.
  const Volume* volume_for_path(const std::string& path) const;
  const Volume& volume(const std::string& id) const;
  std::optional<Placement> placement(const std::string& path) const;

  const std::map<std::string, Placement>& placements() const noexcept { return placements_; }
  std::vector<Volume> volumes() const;
  // Recomputes every volume's `used` from placements.
  void recompute_used();

 private:
  Volume& mutable_volume(const std::string& id);

  std::map<std::string, Volume> volumes_;
  std::map<std::string, Placement> placements_;
};

}  // namespace gridfs::storage
