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

#include "gridfs/catalogue/catalogue.hpp"

#include <algorithm>
#include <mutex>

#include "gridfs/common/error.hpp"

namespace gridfs::catalogue {
namespace {

bool has_meta_suffix(std::string_view name) {
  return name.size() > kMetaSuffix.size() && name.substr(name.size() - kMetaSuffix.size()) == kMetaSuffix;
}

void reject_meta_name(const LfnPath& path) {
  if (has_meta_suffix(path.basename())) {
    fail(Errc::InvalidArgument, "names ending in .meta are reserved for metadata views: " + path.str());
  }
}

std::string serialize_tags(const std::map<std::string, std::string>& tags) {
  std::string out;
  for (const auto& [name, value] : tags) {
    if (!out.empty()) out.push_back('\n');
    out += name;
    out.push_back('=');
    out += value;
  }
  return out;
}

json dir_to_json(const DirectoryTable& d) {
  return {{"kind", "dir"}, {"path", d.path.str()}, {"owner", d.owner}, {"group", d.group}, {"perms", d.perms.to_octal()}};
}

}  // namespace

json entry_to_json(const CatalogueEntry& e) {
  json j = {{"basename", e.basename}, {"guid", e.guid.to_string()}, {"size", e.size},
            {"owner", e.owner},       {"group", e.group},             {"perms", e.perms.to_octal()},
            {"master_pfn", e.master_pfn.str()}, {"metadata", e.metadata}};
  if (e.inline_data) j["inline_data"] = *e.inline_data;
  return j;
}

CatalogueEntry entry_from_json(const json& j) {
  CatalogueEntry e;
  e.basename = j.at("basename").get<std::string>();
  e.guid = Guid::parse(j.at("guid").get<std::string>());
  e.size = j.at("size").get<std::uint64_t>();
  e.owner = j.at("owner").get<std::string>();
  e.group = j.at("group").get<std::string>();
  e.perms = PermissionBits::from_octal(j.at("perms").get<std::string>());
  e.master_pfn = Pfn::parse(j.at("master_pfn").get<std::string>());
  e.metadata = j.value("metadata", std::map<std::string, std::string>{});
  if (j.contains("inline_data")) e.inline_data = j["inline_data"].get<std::string>();
  return e;
}

Catalogue::Catalogue(CatalogueOptions options) : options_(std::move(options)) {
  root_ = std::make_unique<DirectoryTable>();
  root_->owner = options_.superuser;
  root_->group = options_.superuser;
  root_->perms = options_.root_perms;
  rng_.seed(options_.seed != 0 ? options_.seed : std::random_device{}());

  if (options_.journal_path) {
    journal_ = std::make_unique<Journal>(*options_.journal_path);
    std::uint64_t base = 0;
    if (auto snap = journal_->read_snapshot()) {
      load_snapshot(snap->lines);
      base = snap->seq;
    }
    replaying_ = true;
    for (const auto& record : journal_->records_after(base)) replay(record);
    replaying_ = false;
  }
}

Catalogue::~Catalogue() = default;

DirectoryTable* Catalogue::find_dir(const LfnPath& dir) const {
  DirectoryTable* cur = root_.get();
  for (const auto& seg : dir.segments()) {
    auto it = cur->subdirs.find(seg);
    if (it == cur->subdirs.end()) return nullptr;
    cur = it->second.get();
  }
  return cur;
}

void Catalogue::require(const Principal& who, const std::string& owner, const std::string& group,
                        PermissionBits perms, unsigned bits, const LfnPath& what) const {
  if (is_superuser(who)) return;
  if (!permits(who, owner, group, perms, bits)) {
    static constexpr const char* kNames[] = {"", "x", "w", "wx", "r", "rx", "rw", "rwx"};
    fail(Errc::PermissionDenied, who.user + " lacks " + kNames[bits & 7u] + " on " + what.str());
  }
}

DirectoryTable& Catalogue::traverse(const Principal& who, const LfnPath& dir) const {
  DirectoryTable* cur = root_.get();
  require(who, cur->owner, cur->group, cur->perms, kExecute, cur->path);
  for (const auto& seg : dir.segments()) {
    auto it = cur->subdirs.find(seg);
    if (it == cur->subdirs.end()) fail(Errc::NotFound, "no such directory: " + dir.str());
    cur = it->second.get();
    require(who, cur->owner, cur->group, cur->perms, kExecute, cur->path);
  }
  return *cur;
}

DirectoryTable& Catalogue::writable_parent(const Principal& who, const LfnPath& path, Presence presence) const {
  if (path.is_root()) fail(Errc::InvalidArgument, "operation not applicable to /");
  DirectoryTable& parent = traverse(who, path.parent());
  const bool exists = parent.entries.count(path.basename()) || parent.subdirs.count(path.basename());
  if (presence == Presence::kAbsent && exists) fail(Errc::AlreadyExists, path.str() + " exists");
  if (presence == Presence::kPresent && !exists) fail(Errc::NotFound, "no such file: " + path.str());
  require(who, parent.owner, parent.group, parent.perms, kWrite, parent.path);
  return parent;
}

const CatalogueEntry& Catalogue::entry_in(const DirectoryTable& dir, const LfnPath& lfn) const {
  auto it = dir.entries.find(lfn.basename());
  if (it != dir.entries.end()) return it->second;
  if (dir.subdirs.count(lfn.basename())) fail(Errc::IsDirectory, lfn.str() + " is a directory");
  fail(Errc::NotFound, "no such file: " + lfn.str());
}

std::vector<Pfn> Catalogue::all_pfns(const LfnPath& lfn, const CatalogueEntry& entry) const {
  std::vector<Pfn> out{entry.master_pfn};
  if (auto it = replicas_.find(lfn); it != replicas_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  return out;
}

void Catalogue::insert_entry(DirectoryTable& parent, const LfnPath& lfn, CatalogueEntry entry) {
  guids_[entry.guid] = lfn;
  parent.entries.emplace(lfn.basename(), std::move(entry));
  index_[lfn] = &parent;
}

void Catalogue::log(std::string_view op, json args, const Principal& who) {
  if (!journal_ || replaying_) return;
  journal_->append({{"op", op}, {"args", std::move(args)}, {"who", who.to_json()}});
  if (++ops_since_snapshot_ >= options_.snapshot_every_n_ops) {
    journal_->write_snapshot(snapshot_lines());
    ops_since_snapshot_ = 0;
  }
}

void Catalogue::mkdir(const Principal& who, const LfnPath& path, PermissionBits perms) {
  std::unique_lock lock(mu_);
  DirectoryTable& parent = writable_parent(who, path, Presence::kAbsent);
  const auto& name = path.basename();
  if (parent.entries.count(name) || parent.subdirs.count(name)) fail(Errc::AlreadyExists, path.str() + " exists");
  reject_meta_name(path);
  auto table = std::make_unique<DirectoryTable>();
  table->path = path;
  table->owner = who.user;
  table->group = who.primary_group();
  table->perms = perms;
  parent.subdirs.emplace(name, std::move(table));
  log("mkdir", {{"path", path.str()}, {"perms", perms.to_octal()}}, who);
}

void Catalogue::register_file(const Principal& who, const LfnPath& lfn, const Pfn& pfn, std::uint64_t size,
                              const Guid& guid, PermissionBits perms) {
  std::unique_lock lock(mu_);
  reject_meta_name(lfn);
  DirectoryTable& parent = writable_parent(who, lfn, Presence::kAbsent);
  if (parent.entries.count(lfn.basename()) || parent.subdirs.count(lfn.basename())) {
    fail(Errc::AlreadyExists, lfn.str() + " exists");
  }
  if (guids_.count(guid)) fail(Errc::DuplicateGuid, "GUID " + guid.to_string() + " already registered");
  if (auto it = pending_guids_.find(guid); it != pending_guids_.end() && it->second != lfn) {
    fail(Errc::DuplicateGuid, "GUID " + guid.to_string() + " is reserved for " + it->second.str());
  }
  CatalogueEntry e;
  e.basename = lfn.basename();
  e.guid = guid;
  e.size = size;
  e.owner = who.user;
  e.group = who.primary_group();
  e.perms = perms;
  e.master_pfn = pfn;
  insert_entry(parent, lfn, std::move(e));
  if (auto it = pending_.find(lfn); it != pending_.end()) {
    pending_guids_.erase(it->second);
    pending_.erase(it);
  }
  log("register_file",
      {{"lfn", lfn.str()}, {"pfn", pfn.str()}, {"size", size}, {"guid", guid.to_string()}, {"perms", perms.to_octal()}},
      who);
}

Resolved Catalogue::resolve(const Principal& who, const LfnPath& lfn) const {
  std::shared_lock lock(mu_);
  const DirectoryTable& dir = traverse(who, lfn.parent());
  const CatalogueEntry& e = entry_in(dir, lfn);
  require(who, e.owner, e.group, e.perms, kRead, lfn);
  return {e.guid, e.size, all_pfns(lfn, e)};
}

void Catalogue::add_replica(const Principal& who, const LfnPath& lfn, const Pfn& pfn, std::uint64_t observed_size) {
  std::unique_lock lock(mu_);
  DirectoryTable& dir = traverse(who, lfn.parent());
  const CatalogueEntry& e = entry_in(dir, lfn);
  require(who, e.owner, e.group, e.perms, kWrite, lfn);
  if (observed_size != e.size) {
    fail(Errc::SizeMismatch, "replica has " + std::to_string(observed_size) + " bytes, entry has " + std::to_string(e.size));
  }
  auto& row = replicas_[lfn];
  if (pfn == e.master_pfn || std::find(row.begin(), row.end(), pfn) != row.end()) {
    if (row.empty()) replicas_.erase(lfn);
    fail(Errc::DuplicateReplica, pfn.str() + " already recorded for " + lfn.str());
  }
  row.push_back(pfn);
  log("add_replica", {{"lfn", lfn.str()}, {"pfn", pfn.str()}, {"size", observed_size}}, who);
}

void Catalogue::remove_replica(const Principal& who, const LfnPath& lfn, const Pfn& pfn) {
  std::unique_lock lock(mu_);
  DirectoryTable& dir = traverse(who, lfn.parent());
  auto it = dir.entries.find(lfn.basename());
  if (it == dir.entries.end()) fail(Errc::NotFound, "no such file: " + lfn.str());
  CatalogueEntry& e = it->second;
  require(who, e.owner, e.group, e.perms, kWrite, lfn);
  auto row_it = replicas_.find(lfn);
  if (pfn == e.master_pfn) {
    if (row_it == replicas_.end()) fail(Errc::InvalidArgument, "cannot drop the only copy of " + lfn.str());
    e.master_pfn = row_it->second.front();
    row_it->second.erase(row_it->second.begin());
  } else {
    if (row_it == replicas_.end()) fail(Errc::NotFound, pfn.str() + " is not a replica of " + lfn.str());
    auto& row = row_it->second;
    auto pos = std::find(row.begin(), row.end(), pfn);
    if (pos == row.end()) fail(Errc::NotFound, pfn.str() + " is not a replica of " + lfn.str());
    row.erase(pos);
  }
  if (row_it->second.empty()) replicas_.erase(row_it);
  log("remove_replica", {{"lfn", lfn.str()}, {"pfn", pfn.str()}}, who);
}

std::vector<Pfn> Catalogue::remove(const Principal& who, const LfnPath& lfn) {
  std::unique_lock lock(mu_);
  DirectoryTable& parent = writable_parent(who, lfn, Presence::kPresent);
  const auto& name = lfn.basename();
  if (auto sub = parent.subdirs.find(name); sub != parent.subdirs.end()) {
    if (!sub->second->entries.empty() || !sub->second->subdirs.empty()) {
      fail(Errc::IsDirectory, lfn.str() + " is a non-empty directory");
    }
    parent.subdirs.erase(sub);
    log("remove", {{"lfn", lfn.str()}}, who);
    return {};
  }
  auto it = parent.entries.find(name);
  if (it == parent.entries.end()) fail(Errc::NotFound, "no such file: " + lfn.str());
  std::vector<Pfn> pfns = all_pfns(lfn, it->second);
  guids_.erase(it->second.guid);
  parent.entries.erase(it);
  index_.erase(lfn);
  replicas_.erase(lfn);
  log("remove", {{"lfn", lfn.str()}}, who);
  return pfns;
}

void Catalogue::reindex_subtree(DirectoryTable& dir, const LfnPath& new_path) {
  const LfnPath old_path = dir.path;
  dir.path = new_path;
  for (auto& [name, entry] : dir.entries) {
    LfnPath old_lfn = old_path.child(name);
    LfnPath new_lfn = new_path.child(name);
    index_.erase(old_lfn);
    index_[new_lfn] = &dir;
    guids_[entry.guid] = new_lfn;
    if (auto node = replicas_.extract(old_lfn)) {
      node.key() = new_lfn;
      replicas_.insert(std::move(node));
    }
  }
  for (auto& [name, sub] : dir.subdirs) reindex_subtree(*sub, new_path.child(name));
}

void Catalogue::move(const Principal& who, const LfnPath& from, const LfnPath& to) {
  std::unique_lock lock(mu_);
  DirectoryTable& src = writable_parent(who, from, Presence::kPresent);
  DirectoryTable& dst = writable_parent(who, to, Presence::kAbsent);
  const auto& from_name = from.basename();
  const auto& to_name = to.basename();
  const bool is_file = src.entries.count(from_name) > 0;
  if (!is_file && !src.subdirs.count(from_name)) fail(Errc::NotFound, "no such file: " + from.str());
  if (dst.entries.count(to_name) || dst.subdirs.count(to_name)) fail(Errc::AlreadyExists, to.str() + " exists");
  reject_meta_name(to);

  if (is_file) {
    auto node = src.entries.extract(from_name);
    node.key() = to_name;
    node.mapped().basename = to_name;
    guids_[node.mapped().guid] = to;
    dst.entries.insert(std::move(node));
    index_.erase(from);
    index_[to] = &dst;
    if (auto row = replicas_.extract(from)) {
      row.key() = to;
      replicas_.insert(std::move(row));
    }
  } else {
    if (from.is_prefix_of(to)) fail(Errc::InvalidArgument, "cannot move " + from.str() + " into itself");
    auto node = src.subdirs.extract(from_name);
    node.key() = to_name;
    reindex_subtree(*node.mapped(), to);
    dst.subdirs.insert(std::move(node));
  }
  log("move", {{"from", from.str()}, {"to", to.str()}}, who);
}

void Catalogue::set_access(const Principal& who, const LfnPath& path, const std::optional<std::string>& new_owner,
                           const std::optional<std::string>& new_group,
                           const std::optional<PermissionBits>& new_perms) {
  std::unique_lock lock(mu_);
  std::string* owner = nullptr;
  std::string* group = nullptr;
  PermissionBits* perms = nullptr;
  if (path.is_root()) {
    owner = &root_->owner;
    group = &root_->group;
    perms = &root_->perms;
  } else {
    DirectoryTable& dir = traverse(who, path.parent());
    if (auto it = dir.entries.find(path.basename()); it != dir.entries.end()) {
      owner = &it->second.owner;
      group = &it->second.group;
      perms = &it->second.perms;
    } else if (auto sub = dir.subdirs.find(path.basename()); sub != dir.subdirs.end()) {
      owner = &sub->second->owner;
      group = &sub->second->group;
      perms = &sub->second->perms;
    } else {
      fail(Errc::NotFound, "no such file: " + path.str());
    }
  }
  if (!is_superuser(who) && who.user != *owner) {
    fail(Errc::PermissionDenied, who.user + " does not own " + path.str());
  }
  if (new_owner && new_owner->empty()) fail(Errc::InvalidArgument, "empty owner");
  json args = {{"path", path.str()}};
  if (new_owner) {
    *owner = *new_owner;
    args["owner"] = *new_owner;
  }
  if (new_group) {
    *group = *new_group;
    args["group"] = *new_group;
  }
  if (new_perms) {
    *perms = *new_perms;
    args["perms"] = new_perms->to_octal();
  }
  log("set_access", std::move(args), who);
}

std::string Catalogue::read_metadata(const Principal& who, const LfnPath& lfn) const {
  std::shared_lock lock(mu_);
  const DirectoryTable& dir = traverse(who, lfn.parent());
  const CatalogueEntry& e = entry_in(dir, lfn);
  require(who, e.owner, e.group, e.perms, kRead, lfn);
  return serialize_tags(e.metadata);
}

void Catalogue::set_metadata(const Principal& who, const LfnPath& lfn, const std::string& name,
                             const std::string& value) {
  if (name.empty() || name.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos) {
    fail(Errc::InvalidArgument, "metadata tags are single-line name=value pairs");
  }
  std::unique_lock lock(mu_);
  DirectoryTable& dir = traverse(who, lfn.parent());
  auto it = dir.entries.find(lfn.basename());
  if (it == dir.entries.end()) entry_in(dir, lfn);
  require(who, it->second.owner, it->second.group, it->second.perms, kWrite, lfn);
  it->second.metadata[name] = value;
  log("set_metadata", {{"lfn", lfn.str()}, {"name", name}, {"value", value}}, who);
}

std::vector<DirEntry> Catalogue::list_dir(const Principal& who, const LfnPath& dir) const {
  std::shared_lock lock(mu_);
  if (!dir.is_root()) {
    const DirectoryTable& parent = traverse(who, dir.parent());
    if (parent.entries.count(dir.basename())) {
      // Listing a file shows just that file, like ls.
      const auto& e = parent.entries.at(dir.basename());
      require(who, e.owner, e.group, e.perms, kRead, dir);
      return {{e.basename, false, false, e.size, e.owner, e.group, e.perms}};
    }
  }
  const DirectoryTable& d = traverse(who, dir);
  require(who, d.owner, d.group, d.perms, kRead, dir);
  std::vector<DirEntry> out;
  for (const auto& [name, sub] : d.subdirs) out.push_back({name, true, false, 0, sub->owner, sub->group, sub->perms});
  for (const auto& [name, e] : d.entries) {
    out.push_back({name, false, false, e.size, e.owner, e.group, e.perms});
    out.push_back({name + std::string(kMetaSuffix), false, true, serialize_tags(e.metadata).size(), e.owner, e.group,
                   PermissionBits(e.perms.mode() & 0444u)});
  }
  std::sort(out.begin(), out.end(), [](const DirEntry& a, const DirEntry& b) { return a.name < b.name; });
  return out;
}

Stat Catalogue::stat(const Principal& who, const LfnPath& path) const {
  std::shared_lock lock(mu_);
  if (path.is_root()) return {true, 0, root_->owner, root_->group, root_->perms, std::nullopt};
  const DirectoryTable& dir = traverse(who, path.parent());
  const auto& name = path.basename();
  if (auto sub = dir.subdirs.find(name); sub != dir.subdirs.end()) {
    return {true, 0, sub->second->owner, sub->second->group, sub->second->perms, std::nullopt};
  }
  if (auto it = dir.entries.find(name); it != dir.entries.end()) {
    const auto& e = it->second;
    return {false, e.size, e.owner, e.group, e.perms, e.guid};
  }
  if (has_meta_suffix(name)) {
    auto base = dir.entries.find(name.substr(0, name.size() - kMetaSuffix.size()));
    if (base != dir.entries.end()) {
      const auto& e = base->second;
      return {false, serialize_tags(e.metadata).size(), e.owner, e.group, PermissionBits(e.perms.mode() & 0444u),
              std::nullopt};
    }
  }
  fail(Errc::NotFound, "no such file: " + path.str());
}

Guid Catalogue::mint_guid(const Principal& who, const LfnPath& lfn) {
  std::unique_lock lock(mu_);
  reject_meta_name(lfn);
  DirectoryTable& parent = writable_parent(who, lfn, Presence::kAbsent);
  if (parent.entries.count(lfn.basename()) || parent.subdirs.count(lfn.basename())) {
    fail(Errc::AlreadyExists, lfn.str() + " exists");
  }
  Guid guid;
  do {
    guid = Guid::random(rng_);
  } while (guids_.count(guid) || pending_guids_.count(guid));
  if (auto it = pending_.find(lfn); it != pending_.end()) pending_guids_.erase(it->second);
  pending_[lfn] = guid;
  pending_guids_[guid] = lfn;
  return guid;
}

bool Catalogue::is_pending(const LfnPath& lfn, const Guid& guid) const {
  std::shared_lock lock(mu_);
  auto it = pending_.find(lfn);
  return it != pending_.end() && it->second == guid;
}

void Catalogue::put_inline(const Principal& who, const LfnPath& lfn, const std::string& content,
                           PermissionBits perms) {
  std::unique_lock lock(mu_);
  reject_meta_name(lfn);
  DirectoryTable& parent = writable_parent(who, lfn, Presence::kAbsent);
  if (parent.entries.count(lfn.basename()) || parent.subdirs.count(lfn.basename())) {
    fail(Errc::AlreadyExists, lfn.str() + " exists");
  }
  Guid guid;
  if (replaying_ && journal_) {
    // replay supplies the recorded GUID through the pending table
    auto it = pending_.find(lfn);
    guid = it->second;
    pending_guids_.erase(guid);
    pending_.erase(it);
  } else {
    do {
      guid = Guid::random(rng_);
    } while (guids_.count(guid) || pending_guids_.count(guid));
  }
  CatalogueEntry e;
  e.basename = lfn.basename();
  e.guid = guid;
  e.size = content.size();
  e.owner = who.user;
  e.group = who.primary_group();
  e.perms = perms;
  e.master_pfn = Pfn{"db", "catalogue", 1, guid.to_string()};
  e.inline_data = content;
  insert_entry(parent, lfn, std::move(e));
  log("put_inline",
      {{"lfn", lfn.str()}, {"content", content}, {"perms", perms.to_octal()}, {"guid", guid.to_string()}}, who);
}

std::string Catalogue::read_inline(const Principal& who, const LfnPath& lfn) const {
  std::shared_lock lock(mu_);
  const DirectoryTable& dir = traverse(who, lfn.parent());
  const CatalogueEntry& e = entry_in(dir, lfn);
  require(who, e.owner, e.group, e.perms, kRead, lfn);
  if (!e.inline_data) fail(Errc::InvalidArgument, lfn.str() + " is not stored in the catalogue");
  return *e.inline_data;
}

std::optional<CatalogueEntry> Catalogue::lookup_via_index(const LfnPath& lfn) const {
  std::shared_lock lock(mu_);
  auto it = index_.find(lfn);
  if (it == index_.end()) return std::nullopt;
  auto e = it->second->entries.find(lfn.basename());
  if (e == it->second->entries.end()) return std::nullopt;
  return e->second;
}

std::optional<CatalogueEntry> Catalogue::lookup_via_walk(const LfnPath& lfn) const {
  std::shared_lock lock(mu_);
  if (lfn.is_root()) return std::nullopt;
  const DirectoryTable* dir = find_dir(lfn.parent());
  if (dir == nullptr) return std::nullopt;
  auto e = dir->entries.find(lfn.basename());
  if (e == dir->entries.end()) return std::nullopt;
  return e->second;
}

std::vector<LfnPath> Catalogue::walk_files() const {
  std::shared_lock lock(mu_);
  std::vector<LfnPath> out;
  std::vector<const DirectoryTable*> stack{root_.get()};
  while (!stack.empty()) {
    const DirectoryTable* d = stack.back();
    stack.pop_back();
    for (const auto& [name, e] : d->entries) out.push_back(d->path.child(name));
    for (const auto& [name, sub] : d->subdirs) stack.push_back(sub.get());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LfnPath> Catalogue::indexed_files() const {
  std::shared_lock lock(mu_);
  std::vector<LfnPath> out;
  for (const auto& [lfn, _] : index_) out.push_back(lfn);
  return out;
}

std::vector<Pfn> Catalogue::replica_row(const LfnPath& lfn) const {
  std::shared_lock lock(mu_);
  auto it = replicas_.find(lfn);
  return it == replicas_.end() ? std::vector<Pfn>{} : it->second;
}

std::vector<json> Catalogue::snapshot_lines() const {
  std::vector<json> lines;
  std::vector<const DirectoryTable*> stack{root_.get()};
  while (!stack.empty()) {
    const DirectoryTable* d = stack.back();
    stack.pop_back();
    lines.push_back(dir_to_json(*d));
    for (const auto& [name, e] : d->entries) {
      LfnPath lfn = d->path.child(name);
      json line = {{"kind", "file"}, {"lfn", lfn.str()}, {"entry", entry_to_json(e)}};
      if (auto it = replicas_.find(lfn); it != replicas_.end()) {
        for (const auto& pfn : it->second) line["replicas"].push_back(pfn.str());
      }
      lines.push_back(std::move(line));
    }
    // reverse so the pre-order pops children in name order
    for (auto it = d->subdirs.rbegin(); it != d->subdirs.rend(); ++it) stack.push_back(it->second.get());
  }
  return lines;
}

void Catalogue::load_snapshot(const std::vector<json>& lines) {
  for (const auto& line : lines) {
    auto kind = line.at("kind").get<std::string>();
    if (kind == "dir") {
      auto path = LfnPath::parse(line.at("path").get<std::string>());
      DirectoryTable* d = nullptr;
      if (path.is_root()) {
        d = root_.get();
      } else {
        DirectoryTable* parent = find_dir(path.parent());
        if (parent == nullptr) fail(Errc::BackendFailure, "snapshot lists " + path.str() + " before its parent");
        auto table = std::make_unique<DirectoryTable>();
        table->path = path;
        d = table.get();
        parent->subdirs.emplace(path.basename(), std::move(table));
      }
      d->owner = line.at("owner").get<std::string>();
      d->group = line.at("group").get<std::string>();
      d->perms = PermissionBits::from_octal(line.at("perms").get<std::string>());
    } else if (kind == "file") {
      auto lfn = LfnPath::parse(line.at("lfn").get<std::string>());
      DirectoryTable* parent = find_dir(lfn.parent());
      if (parent == nullptr) fail(Errc::BackendFailure, "snapshot lists " + lfn.str() + " before its directory");
      insert_entry(*parent, lfn, entry_from_json(line.at("entry")));
      for (const auto& r : line.value("replicas", json::array())) replicas_[lfn].push_back(Pfn::parse(r.get<std::string>()));
    }
  }
}

void Catalogue::replay(const json& record) {
  const auto op = record.at("op").get<std::string>();
  const json& a = record.at("args");
  const Principal who = Principal::from_json(record.at("who"));
  auto path = [&](const char* key) { return LfnPath::parse(a.at(key).get<std::string>()); };
  auto perms = [&] { return PermissionBits::from_octal(a.at("perms").get<std::string>()); };

  if (op == "mkdir") {
    mkdir(who, path("path"), perms());
  } else if (op == "register_file") {
    register_file(who, path("lfn"), Pfn::parse(a.at("pfn").get<std::string>()), a.at("size").get<std::uint64_t>(),
                  Guid::parse(a.at("guid").get<std::string>()), perms());
  } else if (op == "add_replica") {
    add_replica(who, path("lfn"), Pfn::parse(a.at("pfn").get<std::string>()), a.at("size").get<std::uint64_t>());
  } else if (op == "remove_replica") {
    remove_replica(who, path("lfn"), Pfn::parse(a.at("pfn").get<std::string>()));
  } else if (op == "remove") {
    remove(who, path("lfn"));
  } else if (op == "move") {
    move(who, path("from"), path("to"));
  } else if (op == "set_access") {
    std::optional<std::string> owner;
    std::optional<std::string> group;
    std::optional<PermissionBits> mode;
    if (a.contains("owner")) owner = a["owner"].get<std::string>();
    if (a.contains("group")) group = a["group"].get<std::string>();
    if (a.contains("perms")) mode = perms();
    set_access(who, path("path"), owner, group, mode);
  } else if (op == "set_metadata") {
    set_metadata(who, path("lfn"), a.at("name").get<std::string>(), a.at("value").get<std::string>());
  } else if (op == "put_inline") {
    auto lfn = path("lfn");
    auto guid = Guid::parse(a.at("guid").get<std::string>());
    pending_[lfn] = guid;
    pending_guids_[guid] = lfn;
    put_inline(who, lfn, a.at("content").get<std::string>(), perms());
  } else {
    fail(Errc::BackendFailure, "unknown journal op '" + op + "'");
  }
}

}  // namespace gridfs::catalogue
