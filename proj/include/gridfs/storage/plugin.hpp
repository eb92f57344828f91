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
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gridfs/catalogue/types.hpp"

namespace gridfs::storage {

using catalogue::Pfn;

enum class CopyDirection { kIntoStore, kOutOfStore };

struct StoredFile {
  std::string path;
  std::uint64_t bytes = 0;
  friend bool operator==(const StoredFile&, const StoredFile&) = default;
};

// Backend interface of a storage element. Stored paths are absolute
// ("/mount/ab/<guid>") and always lie under one of the plugin's roots.
class SePlugin {
 public:
  SePlugin(std::string protocol, std::string host, std::uint16_t port, std::vector<std::string> roots);
  virtual ~SePlugin() = default;

  virtual void mkdir(const std::string& dir) = 0;
  // Hard link within one root; CrossVolumeLink otherwise.
  virtual void link(const std::string& src, const std::string& dst) = 0;
  virtual void cp(const std::filesystem::path& local, const std::string& stored, CopyDirection direction) = 0;
  virtual void mv(const std::string& src, const std::string& dst) = 0;
  virtual void rm(const std::string& path) = 0;
  virtual std::uint64_t size_of(const std::string& path) = 0;
  Pfn url(const std::string& path) const;
  // Every stored file under every root, sorted by path.
  virtual std::vector<StoredFile> lslist() = 0;

  const std::string& protocol() const noexcept { return protocol_; }
  const std::vector<std::string>& roots() const noexcept { return roots_; }
  // Root containing `path`, or empty.
  std::string root_of(const std::string& path) const;

 protected:
  void require_in_root(const std::string& path) const;

 private:
  std::string protocol_;
  std::string host_;
  std::uint16_t port_;
  std::vector<std::string> roots_;
};

// Stored paths are local filesystem paths.
class FilePlugin : public SePlugin {
 public:
  FilePlugin(std::string host, std::uint16_t port, std::vector<std::string> roots);

  void mkdir(const std::string& dir) override;
  void link(const std::string& src, const std::string& dst) override;
  void cp(const std::filesystem::path& local, const std::string& stored, CopyDirection direction) override;
  void mv(const std::string& src, const std::string& dst) override;
  void rm(const std::string& path) override;
  std::uint64_t size_of(const std::string& path) override;
  std::vector<StoredFile> lslist() override;
};

// Keeps file content in process memory; roots are virtual prefixes.
class MemPlugin : public SePlugin {
 public:
  MemPlugin(std::string host, std::uint16_t port, std::vector<std::string> roots);

  void mkdir(const std::string& dir) override;
  void link(const std::string& src, const std::string& dst) override;
  void cp(const std::filesystem::path& local, const std::string& stored, CopyDirection direction) override;
  void mv(const std::string& src, const std::string& dst) override;
  void rm(const std::string& path) override;
  std::uint64_t size_of(const std::string& path) override;
  std::vector<StoredFile> lslist() override;

 private:
  std::mutex mu_;
  std::set<std::string> dirs_;
  std::map<std::string, std::shared_ptr<const std::string>> files_;
};

std::unique_ptr<SePlugin> make_plugin(const std::string& kind, const std::string& host, std::uint16_t port,
                                      std::vector<std::string> roots);

}  // namespace gridfs::storage
