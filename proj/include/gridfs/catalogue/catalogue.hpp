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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridfs/catalogue/types.hpp"
#include "gridfs/common/guid.hpp"
#include "gridfs/common/journal.hpp"

namespace gridfs::catalogue {

// Suffix of the read-only virtual file exposing an entry's metadata tags.
inline constexpr std::string_view kMetaSuffix = ".meta";

struct CatalogueEntry {
  std::string basename;
  Guid guid;
  std::uint64_t size = 0;
  std::string owner;
  std::string group;
  PermissionBits perms;
  Pfn master_pfn;
  std::map<std::string, std::string> metadata;
  // Content of small files kept in the catalogue itself (credential files).
  std::optional<std::string> inline_data;
};

struct DirectoryTable {
  LfnPath path;
  std::string owner;
  std::string group;
  PermissionBits perms;
  std::map<std::string, CatalogueEntry> entries;
  std::map<std::string, std::unique_ptr<DirectoryTable>> subdirs;
};

struct Resolved {
  Guid guid;
  std::uint64_t size = 0;
  std::vector<Pfn> pfns;  // master first, then replicas in insertion order
};

struct DirEntry {
  std::string name;
  bool is_dir = false;
  bool is_virtual = false;  // a <file>.meta view
  std::uint64_t size = 0;
  std::string owner;
  std::string group;
  PermissionBits perms;
};

struct Stat {
  bool is_dir = false;
  std::uint64_t size = 0;
  std::string owner;
  std::string group;
  PermissionBits perms;
  std::optional<Guid> guid;
};

struct CatalogueOptions {
  std::string superuser = "admin";
  std::optional<std::filesystem::path> journal_path;
  std::uint64_t snapshot_every_n_ops = 1000;
  // Seed for GUID minting; 0 draws from std::random_device.
  std::uint64_t seed = 0;
  PermissionBits root_perms{0755};
};

// The virtual file catalogue: a tree of directory tables holding entries
// (LFN -> master PFN), a replica table, and a flat LFN index. Mutations are
// serialized under one writer lock and, when a journal is configured, logged
// before the lock is released.
class Catalogue {
 public:
  explicit Catalogue(CatalogueOptions options = {});
  ~Catalogue();

  Catalogue(const Catalogue&) = delete;
  Catalogue& operator=(const Catalogue&) = delete;

  void mkdir(const Principal& who, const LfnPath& path, PermissionBits perms);
  void register_file(const Principal& who, const LfnPath& lfn, const Pfn& pfn, std::uint64_t size, const Guid& guid,
                     PermissionBits perms);
  Resolved resolve(const Principal& who, const LfnPath& lfn) const;
  void add_replica(const Principal& who, const LfnPath& lfn, const Pfn& pfn, std::uint64_t observed_size);
  // Drops one physical location. Removing the master promotes the first
  // replica; the last remaining copy cannot be dropped this way.
  void remove_replica(const Principal& who, const LfnPath& lfn, const Pfn& pfn);
  // Removes a file (returning every PFN that held it) or an empty directory.
  std::vector<Pfn> remove(const Principal& who, const LfnPath& lfn);
  void move(const Principal& who, const LfnPath& from, const LfnPath& to);
  void set_access(const Principal& who, const LfnPath& path, const std::optional<std::string>& new_owner,
                  const std::optional<std::string>& new_group, const std::optional<PermissionBits>& new_perms);
  std::string read_metadata(const Principal& who, const LfnPath& lfn) const;
  void set_metadata(const Principal& who, const LfnPath& lfn, const std::string& name, const std::string& value);
  std::vector<DirEntry> list_dir(const Principal& who, const LfnPath& dir) const;
  Stat stat(const Principal& who, const LfnPath& path) const;

  // Write-open: checks that `lfn` may be created by `who` and reserves a
  // fresh GUID for it until register_file.
  Guid mint_guid(const Principal& who, const LfnPath& lfn);
  bool is_pending(const LfnPath& lfn, const Guid& guid) const;

  // Small files stored in the catalogue ("db" protocol), e.g. credentials.
  void put_inline(const Principal& who, const LfnPath& lfn, const std::string& content, PermissionBits perms);
  std::string read_inline(const Principal& who, const LfnPath& lfn) const;

  bool is_superuser(const Principal& who) const noexcept { return who.user == options_.superuser; }
  const std::string& superuser() const noexcept { return options_.superuser; }

  // Introspection for invariant checks.
  std::optional<CatalogueEntry> lookup_via_index(const LfnPath& lfn) const;
  std::optional<CatalogueEntry> lookup_via_walk(const LfnPath& lfn) const;
  std::vector<LfnPath> walk_files() const;
  std::vector<LfnPath> indexed_files() const;
  std::vector<Pfn> replica_row(const LfnPath& lfn) const;

 private:
  DirectoryTable* find_dir(const LfnPath& dir) const;
  // Walks root..dir requiring each level to exist and be traversable.
  DirectoryTable& traverse(const Principal& who, const LfnPath& dir) const;
  enum class Presence { kAbsent, kPresent };
  // Traverses to the parent, checks that `path` is absent/present there,
  // then requires the write bit on the parent.
  DirectoryTable& writable_parent(const Principal& who, const LfnPath& path, Presence presence) const;
  const CatalogueEntry& entry_in(const DirectoryTable& dir, const LfnPath& lfn) const;
  void require(const Principal& who, const std::string& owner, const std::string& group, PermissionBits perms,
               unsigned bits, const LfnPath& what) const;
  std::vector<Pfn> all_pfns(const LfnPath& lfn, const CatalogueEntry& entry) const;
  void insert_entry(DirectoryTable& parent, const LfnPath& lfn, CatalogueEntry entry);
  void reindex_subtree(DirectoryTable& dir, const LfnPath& old_prefix);

  void log(std::string_view op, json args, const Principal& who);
  void replay(const json& record);
  std::vector<json> snapshot_lines() const;
  void load_snapshot(const std::vector<json>& lines);

  CatalogueOptions options_;
  mutable std::shared_mutex mu_;
  std::unique_ptr<DirectoryTable> root_;
  std::map<LfnPath, DirectoryTable*> index_;
  std::map<LfnPath, std::vector<Pfn>> replicas_;
  std::unordered_map<Guid, LfnPath> guids_;
  std::map<LfnPath, Guid> pending_;
  std::unordered_map<Guid, LfnPath> pending_guids_;
  std::mt19937_64 rng_;
  std::unique_ptr<Journal> journal_;
  std::uint64_t ops_since_snapshot_ = 0;
  bool replaying_ = false;
};

json entry_to_json(const CatalogueEntry& e);
CatalogueEntry entry_from_json(const json& j);

}  // namespace gridfs::catalogue
