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

#include "gridfs/storage/plugin.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gridfs/common/error.hpp"

namespace gridfs::storage {
namespace fs = std::filesystem;

namespace {

std::string parent_of(const std::string& path) {
  auto slash = path.rfind('/');
  return slash == 0 || slash == std::string::npos ? std::string("/") : path.substr(0, slash);
}

bool hidden(const fs::path& p) { return !p.filename().empty() && p.filename().string().front() == '.'; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(Errc::BackendFailure, "cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const fs::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) fail(Errc::BackendFailure, "cannot write " + p.string());
}

}  // namespace

SePlugin::SePlugin(std::string protocol, std::string host, std::uint16_t port, std::vector<std::string> roots)
    : protocol_(std::move(protocol)), host_(std::move(host)), port_(port), roots_(std::move(roots)) {
  for (auto& r : roots_) {
    if (r.empty() || r.front() != '/') fail(Errc::InvalidArgument, "volume root must be absolute: '" + r + "'");
    while (r.size() > 1 && r.back() == '/') r.pop_back();
  }
}

Pfn SePlugin::url(const std::string& path) const {
  require_in_root(path);
  return Pfn{protocol_, host_, port_, path.substr(1)};
}

std::string SePlugin::root_of(const std::string& path) const {
  for (const auto& r : roots_) {
    if (path.size() > r.size() && path.compare(0, r.size(), r) == 0 && path[r.size()] == '/') return r;
  }
  return {};
}

void SePlugin::require_in_root(const std::string& path) const {
  if (root_of(path).empty() || path.find("/../") != std::string::npos) {
    fail(Errc::InvalidArgument, "path outside every volume: " + path);
  }
}

FilePlugin::FilePlugin(std::string host, std::uint16_t port, std::vector<std::string> roots)
    : SePlugin("file", std::move(host), port, std::move(roots)) {
  for (const auto& r : this->roots()) fs::create_directories(r);
}

void FilePlugin::mkdir(const std::string& dir) {
  require_in_root(dir + "/x");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::BackendFailure, "mkdir " + dir + ": " + ec.message());
}

void FilePlugin::link(const std::string& src, const std::string& dst) {
  require_in_root(src);
  require_in_root(dst);
  if (root_of(src) != root_of(dst)) fail(Errc::CrossVolumeLink, src + " and " + dst + " are on different volumes");
  if (!fs::is_regular_file(src)) fail(Errc::NotFound, src);
  if (fs::exists(dst)) fail(Errc::AlreadyExists, dst);
  std::error_code ec;
  fs::create_hard_link(src, dst, ec);
  if (ec) fail(Errc::BackendFailure, "link " + src + ": " + ec.message());
}

void FilePlugin::cp(const fs::path& local, const std::string& stored, CopyDirection direction) {
  require_in_root(stored);
  std::error_code ec;
  if (direction == CopyDirection::kIntoStore) {
    if (!fs::is_regular_file(local)) fail(Errc::NotFound, local.string());
    fs::create_directories(fs::path(stored).parent_path(), ec);
    fs::path tmp = fs::path(stored).parent_path() / ("." + fs::path(stored).filename().string() + ".tmp");
    fs::copy_file(local, tmp, fs::copy_options::overwrite_existing, ec);
    if (!ec) fs::rename(tmp, stored, ec);
    if (ec) {
      fs::remove(tmp);
      fail(Errc::BackendFailure, "cp into " + stored + ": " + ec.message());
    }
  } else {
    if (!fs::is_regular_file(stored)) fail(Errc::NotFound, stored);
    fs::copy_file(stored, local, fs::copy_options::overwrite_existing, ec);
    if (ec) fail(Errc::BackendFailure, "cp out of " + stored + ": " + ec.message());
  }
}

void FilePlugin::mv(const std::string& src, const std::string& dst) {
  require_in_root(src);
  require_in_root(dst);
  if (!fs::is_regular_file(src)) fail(Errc::NotFound, src);
  if (fs::exists(dst)) fail(Errc::AlreadyExists, dst);
  std::error_code ec;
  fs::create_directories(fs::path(dst).parent_path(), ec);
  fs::rename(src, dst, ec);
  if (ec) fail(Errc::BackendFailure, "mv " + src + ": " + ec.message());
}

void FilePlugin::rm(const std::string& path) {
  require_in_root(path);
  std::error_code ec;
  if (!fs::remove(path, ec)) fail(ec ? Errc::BackendFailure : Errc::NotFound, path);
}

std::uint64_t FilePlugin::size_of(const std::string& path) {
  require_in_root(path);
  std::error_code ec;
  auto n = fs::file_size(path, ec);
  if (ec) fail(Errc::NotFound, path);
  return n;
}

std::vector<StoredFile> FilePlugin::lslist() {
  std::vector<StoredFile> out;
  for (const auto& root : roots()) {
    if (!fs::exists(root)) continue;
    for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
      if (it->is_regular_file() && !hidden(it->path())) out.push_back({it->path().string(), it->file_size()});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

MemPlugin::MemPlugin(std::string host, std::uint16_t port, std::vector<std::string> roots)
    : SePlugin("mem", std::move(host), port, std::move(roots)) {
  for (const auto& r : this->roots()) dirs_.insert(r);
}

void MemPlugin::mkdir(const std::string& dir) {
  require_in_root(dir + "/x");
  std::lock_guard lock(mu_);
  dirs_.insert(dir);
}

void MemPlugin::link(const std::string& src, const std::string& dst) {
  require_in_root(src);
  require_in_root(dst);
  if (root_of(src) != root_of(dst)) fail(Errc::CrossVolumeLink, src + " and " + dst + " are on different volumes");
  std::lock_guard lock(mu_);
  auto it = files_.find(src);
  if (it == files_.end()) fail(Errc::NotFound, src);
  if (files_.count(dst)) fail(Errc::AlreadyExists, dst);
  files_[dst] = it->second;
}

void MemPlugin::cp(const fs::path& local, const std::string& stored, CopyDirection direction) {
  require_in_root(stored);
  if (direction == CopyDirection::kIntoStore) {
    if (!fs::is_regular_file(local)) fail(Errc::NotFound, local.string());
    auto data = std::make_shared<const std::string>(read_file(local));
    std::lock_guard lock(mu_);
    files_[stored] = std::move(data);
    dirs_.insert(parent_of(stored));
  } else {
    std::shared_ptr<const std::string> data;
    {
      std::lock_guard lock(mu_);
      auto it = files_.find(stored);
      if (it == files_.end()) fail(Errc::NotFound, stored);
      data = it->second;
    }
    write_file(local, *data);
  }
}

void MemPlugin::mv(const std::string& src, const std::string& dst) {
  require_in_root(src);
  require_in_root(dst);
  std::lock_guard lock(mu_);
  auto it = files_.find(src);
  if (it == files_.end()) fail(Errc::NotFound, src);
  if (files_.count(dst)) fail(Errc::AlreadyExists, dst);
  files_[dst] = it->second;
  files_.erase(src);
}

void MemPlugin::rm(const std::string& path) {
  require_in_root(path);
  std::lock_guard lock(mu_);
  if (files_.erase(path) == 0) fail(Errc::NotFound, path);
}

std::uint64_t MemPlugin::size_of(const std::string& path) {
  require_in_root(path);
  std::lock_guard lock(mu_);
  auto it = files_.find(path);
  if (it == files_.end()) fail(Errc::NotFound, path);
  return it->second->size();
}

std::vector<StoredFile> MemPlugin::lslist() {
  std::lock_guard lock(mu_);
  std::vector<StoredFile> out;
  for (const auto& [path, data] : files_) out.push_back({path, data->size()});
  return out;
}

std::unique_ptr<SePlugin> make_plugin(const std::string& kind, const std::string& host, std::uint16_t port,
                                      std::vector<std::string> roots) {
  if (kind == "file") return std::make_unique<FilePlugin>(host, port, std::move(roots));
  if (kind == "mem") return std::make_unique<MemPlugin>(host, port, std::move(roots));
  fail(Errc::InvalidArgument, "unknown storage plugin '" + kind + "'");
}

}  // namespace gridfs::storage
