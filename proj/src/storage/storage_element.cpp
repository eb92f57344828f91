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

#include "gridfs/storage/storage_element.hpp"

#include <chrono>
#include <fstream>

#include "gridfs/common/error.hpp"
#include "gridfs/common/hash.hpp"
#include "gridfs/wire/tcp.hpp"

namespace gridfs::storage {
namespace fs = std::filesystem;

namespace {

SeConfig normalized(SeConfig c) {
  if (c.se_name.empty()) fail(Errc::InvalidArgument, "storage element without se_name");
  if (c.cache_dir.empty()) fail(Errc::InvalidArgument, "storage element " + c.se_name + " without cache_dir");
  for (auto& v : c.volumes) {
    if (c.plugin == "file") {
      v.mount_point = fs::absolute(v.mount_point).lexically_normal().string();
    } else if (v.mount_point.empty() || v.mount_point.front() != '/') {
      v.mount_point = "/" + v.mount_point;
    }
    while (v.mount_point.size() > 1 && v.mount_point.back() == '/') v.mount_point.pop_back();
  }
  return c;
}

std::vector<std::string> mount_points(const SeConfig& c) {
  std::vector<std::string> out;
  for (const auto& v : c.volumes) out.push_back(v.mount_point);
  return out;
}


std::int64_t wall_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

}  // namespace

SeConfig SeConfig::from_json(const json& j) {
  SeConfig c;
  c.se_name = j.at("se_name").get<std::string>();
  c.plugin = j.value("plugin", std::string("file"));
  c.listen = j.at("listen").get<std::string>();
  c.site = j.value("site", std::string());
  c.cache_dir = j.at("cache_dir").get<std::string>();
  c.cache_budget_bytes = j.value("cache_budget_bytes", c.cache_budget_bytes);
  for (const auto& v : j.at("volumes")) c.volumes.push_back(VolumeSpec::from_json(v));
  return c;
}

json SeConfig::to_json() const {
  json vols = json::array();
  for (const auto& v : volumes) vols.push_back(v.to_json());
  return {{"se_name", se_name},
          {"plugin", plugin},
          {"listen", listen},
          {"site", site},
          {"cache_dir", cache_dir.string()},
          {"cache_budget_bytes", cache_budget_bytes},
          {"volumes", vols}};
}

json ResyncReport::to_json() const { return {{"added", added}, {"removed", removed}, {"size_corrected", size_corrected}}; }

StorageElement::StorageElement(SeConfig config, Clock clock)
    : config_(normalized(std::move(config))), clock_(std::move(clock)), lvm_(config_.volumes) {
  if (!clock_) clock_ = wall_seconds;
  std::tie(host_, port_) = wire::split_host_port(config_.listen);
  plugin_ = make_plugin(config_.plugin, host_, port_, mount_points(config_));
  cache_ = std::make_unique<DiskCache>(config_.cache_dir / "fetch", config_.cache_budget_bytes);
  guid_cache_ = std::make_unique<DiskCache>(config_.cache_dir / "guid", config_.cache_budget_bytes);
  staging_dir_ = config_.cache_dir / "staging";
  fs::create_directories(staging_dir_);
  for (const auto& e : fs::directory_iterator(staging_dir_)) fs::remove(e.path());
  rng_.seed(fnv1a(config_.se_name));
  // Files already present in the volumes belong to this element.
  resync();
}

StorageElement::~StorageElement() {
  std::lock_guard lock(mu_);
  for (const auto& [path, up] : uploads_) {
    std::error_code ec;
    fs::remove(up.staging, ec);
  }
}

std::string StorageElement::stored_path(const Pfn& pfn) const {
  if (pfn.protocol != plugin_->protocol() || pfn.host != host_ || pfn.port != port_) {
    fail(Errc::NotFound, pfn.str() + " does not belong to " + config_.se_name);
  }
  std::string path = "/" + pfn.direntry;
  if (plugin_->root_of(path).empty()) fail(Errc::NotFound, pfn.str() + " is outside every volume");
  return path;
}

Allocation StorageElement::allocate_pfn(std::uint64_t size_hint, std::optional<Guid> guid) {
  std::lock_guard lock(mu_);
  if (!guid) guid = Guid::random(rng_);
  const Volume& vol = lvm_.pick(size_hint);
  const std::string dir = vol.spec.mount_point + "/" + guid->prefix();
  const std::string path = dir + "/" + guid->to_string();
  if (uploads_.count(path) || lvm_.placement(path)) fail(Errc::AlreadyExists, path + " is already allocated");
  plugin_->mkdir(dir);
  lvm_.reserve(vol.spec.id, size_hint);

  Upload up;
  up.volume_id = vol.spec.id;
  up.reserved = size_hint;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%016llx%08llx", static_cast<unsigned long long>(rng_()),
                static_cast<unsigned long long>(++next_token_));
  up.token = buf;
  up.staging = staging_dir_ / (up.token + ".part");
  std::ofstream(up.staging, std::ios::binary | std::ios::trunc).flush();
  Allocation a{plugin_->url(path), up.volume_id, up.token};
  uploads_.emplace(path, std::move(up));
  return a;
}

StorageElement::Upload& StorageElement::upload_for(const std::string& path, const std::string& token) {
  auto it = uploads_.find(path);
  if (it == uploads_.end()) fail(Errc::NotAllocated, path + " is not an open upload");
  if (it->second.token != token) fail(Errc::NotAllocated, path + " is owned by another connection");
  return it->second;
}

void StorageElement::finish_upload(const std::string& path) {
  auto it = uploads_.find(path);
  lvm_.release(it->second.volume_id, it->second.reserved);
  std::error_code ec;
  fs::remove(it->second.staging, ec);
  uploads_.erase(it);
}

void StorageElement::append(const Pfn& pfn, const std::string& token, std::uint64_t offset, std::string_view data) {
  const std::string path = stored_path(pfn);
  std::lock_guard lock(mu_);
  Upload& up = upload_for(path, token);
  if (offset != up.staged) {
    fail(Errc::NonSequentialWrite, "write at " + std::to_string(offset) + ", expected " + std::to_string(up.staged));
  }
  if (data.empty()) return;
  std::ofstream out(up.staging, std::ios::binary | std::ios::app);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) fail(Errc::BackendFailure, "staging write failed for " + path);
  up.staged += data.size();
}

void StorageElement::sync(const Pfn& pfn, const std::string& token) {
  const std::string path = stored_path(pfn);
  std::lock_guard lock(mu_);
  upload_for(path, token);
}

std::uint64_t StorageElement::commit(const Pfn& pfn, const std::string& token,
                                     std::optional<std::uint64_t> expected_size) {
  const std::string path = stored_path(pfn);
  std::lock_guard lock(mu_);
  Upload& up = upload_for(path, token);
  if (expected_size && *expected_size != up.staged) {
    fail(Errc::SizeValidationFailed, "client wrote " + std::to_string(*expected_size) + " bytes, SE holds " +
                                         std::to_string(up.staged));
  }
  const std::uint64_t bytes = up.staged;
  const std::string volume_id = up.volume_id;
  const fs::path staging = up.staging;
  lvm_.release(volume_id, up.reserved);
  up.reserved = 0;
  try {
    // Files added behind our back still occupy the disk.
    const Volume& vol = lvm_.volume(volume_id);
    const std::uint64_t on_disk = volume_bytes_on_disk(vol.spec.mount_point);
    const std::uint64_t unknown = on_disk > vol.used ? on_disk - vol.used : 0;
    if (unknown + bytes > vol.free_bytes()) {
      fail(Errc::QuotaExceeded, std::to_string(bytes) + " bytes do not fit volume " + volume_id);
    }
    lvm_.place(path, volume_id, bytes, clock_());
  } catch (const Error&) {
    finish_upload(path);
    throw;
  }
  try {
    plugin_->cp(staging, path, CopyDirection::kIntoStore);
  } catch (const Error&) {
    lvm_.unplace(path);
    finish_upload(path);
    throw;
  }
  finish_upload(path);
  return bytes;
}

void StorageElement::abort(const Pfn& pfn, const std::string& token) {
  const std::string path = stored_path(pfn);
  std::lock_guard lock(mu_);
  upload_for(path, token);
  finish_upload(path);
}

std::uint64_t StorageElement::store_file(const Pfn& pfn, const std::string& token, std::string_view data) {
  append(pfn, token, 0, data);
  return commit(pfn, token, data.size());
}

std::string StorageElement::fetch_file(const Pfn& pfn, std::uint64_t offset, std::uint64_t length) {
  const std::string path = stored_path(pfn);
  std::uint64_t size = 0;
  {
    std::lock_guard lock(mu_);
    auto p = lvm_.placement(path);
    if (!p) fail(Errc::NotFound, "no stored file " + path);
    size = p->bytes;
  }
  if (offset > size || length > size - offset) {
    fail(Errc::RangeError, "range " + std::to_string(offset) + "+" + std::to_string(length) + " beyond " +
                               std::to_string(size) + " bytes");
  }
  if (length == 0) return {};
  auto lease = cache_->get_or_pull(path, [&](const fs::path& dest) {
    plugin_->cp(dest, path, CopyDirection::kOutOfStore);
  });
  std::ifstream in(lease.path(), std::ios::binary);
  std::string out(length, '\0');
  in.seekg(static_cast<std::streamoff>(offset));
  in.read(out.data(), static_cast<std::streamsize>(length));
  if (static_cast<std::uint64_t>(in.gcount()) != length) fail(Errc::BackendFailure, "short read from " + path);
  return out;
}

std::uint64_t StorageElement::size_of(const Pfn& pfn) {
  const std::string path = stored_path(pfn);
  std::lock_guard lock(mu_);
  if (auto it = uploads_.find(path); it != uploads_.end()) return it->second.staged;
  if (auto p = lvm_.placement(path)) return p->bytes;
  fail(Errc::NotFound, "no stored file " + path);
}

void StorageElement::rm(const Pfn& pfn) {
  const std::string path = stored_path(pfn);
  std::lock_guard lock(mu_);
  if (uploads_.count(path)) {
    finish_upload(path);
    return;
  }
  bool known = lvm_.placement(path).has_value();
  try {
    plugin_->rm(path);
  } catch (const Error& e) {
    if (e.code() != Errc::NotFound || !known) throw;
  }
  lvm_.unplace(path);
  cache_->erase(path);
}

std::vector<std::string> StorageElement::expire_files(std::int64_t now_s) {
  std::lock_guard lock(mu_);
  std::vector<std::string> removed;
  std::string failures;
  for (const auto& path : lvm_.expired(now_s)) {
    try {
      plugin_->rm(path);
    } catch (const Error& e) {
      if (e.code() != Errc::NotFound) {
        failures += " " + path;
        continue;
      }
    }
    lvm_.unplace(path);
    cache_->erase(path);
    removed.push_back(path);
  }
  if (!failures.empty()) {
    fail(Errc::BackendFailure, "removed " + std::to_string(removed.size()) + " expired files; could not remove" + failures);
  }
  return removed;
}

ResyncReport StorageElement::resync() {
  std::lock_guard lock(mu_);
  ResyncReport report;
  std::map<std::string, std::uint64_t> listed;
  for (const auto& f : plugin_->lslist()) {
    if (lvm_.volume_for_path(f.path) != nullptr) listed.emplace(f.path, f.bytes);
  }
  std::vector<std::string> gone;
  for (const auto& [path, p] : lvm_.placements()) {
    if (!listed.count(path)) gone.push_back(path);
  }
  for (const auto& path : gone) {
    lvm_.unplace(path);
    cache_->erase(path);
    ++report.removed;
  }
  const std::int64_t now = clock_();
  for (const auto& [path, bytes] : listed) {
    auto p = lvm_.placement(path);
    if (!p) {
      lvm_.adopt(path, lvm_.volume_for_path(path)->spec.id, bytes, now);
      ++report.added;
    } else if (p->bytes != bytes) {
      lvm_.adopt(path, p->volume_id, bytes, now);
      cache_->erase(path);
      ++report.size_corrected;
    }
  }
  lvm_.recompute_used();
  return report;
}

fs::path StorageElement::cache_get_or_pull(const Guid& guid, const DiskCache::Producer& producer) {
  auto lease = guid_cache_->get_or_pull(guid.to_string(), producer);
  return lease.path();
}

std::vector<Volume> StorageElement::volumes() const {
  std::lock_guard lock(mu_);
  return lvm_.volumes();
}

std::map<std::string, Placement> StorageElement::placements() const {
  std::lock_guard lock(mu_);
  return lvm_.placements();
}

std::vector<StoredFile> StorageElement::lslist() { return plugin_->lslist(); }

std::uint64_t StorageElement::volume_bytes_on_disk(const std::string& mount_point) {
  std::uint64_t total = 0;
  for (const auto& f : plugin_->lslist()) {
    if (f.path.size() > mount_point.size() && f.path.compare(0, mount_point.size(), mount_point) == 0 &&
        f.path[mount_point.size()] == '/') {
      total += f.bytes;
    }
  }
  return total;
}

std::size_t StorageElement::in_flight() const {
  std::lock_guard lock(mu_);
  return uploads_.size();
}

}  // namespace gridfs::storage
