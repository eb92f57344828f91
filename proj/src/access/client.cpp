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

#include "gridfs/access/client.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include "gridfs/common/error.hpp"

namespace gridfs::access {
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kChunk = 4ull << 20;

// Owning POSIX descriptor.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int get() const noexcept { return fd_; }

 private:
  int fd_ = -1;
};

[[noreturn]] void io_fail(const std::string& what, const fs::path& p) {
  fail(Errc::BackendFailure, what + " " + p.string() + ": " + std::strerror(errno));
}

void write_all(int fd, std::string_view data, const fs::path& p) {
  while (!data.empty()) {
    auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("write", p);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::string pread_exact(int fd, std::uint64_t offset, std::uint64_t length, const fs::path& p) {
  std::string out(length, '\0');
  std::uint64_t got = 0;
  while (got < length) {
    auto n = ::pread(fd, out.data() + got, length - got, static_cast<off_t>(offset + got));
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("read", p);
    }
    if (n == 0) fail(Errc::BackendFailure, "short read from " + p.string());
    got += static_cast<std::uint64_t>(n);
  }
  return out;
}

}  // namespace

struct FileHandle {
  std::mutex mu;
  int id = 0;
  LfnPath lfn;
  Guid guid;
  OpenMode mode = OpenMode::kRead;
  AccessStrategy strategy = AccessStrategy::kRemotePartial;
  std::uint64_t size = 0;
  std::uint64_t next_offset = 0;
  PermissionBits perms;
  std::unique_ptr<aiod::DataChannel> channel;
  fs::path local;  // staged copy (read) or staging file (write)
  Fd fd;
};

std::string_view to_string(OpenMode mode) noexcept { return mode == OpenMode::kRead ? "read" : "write-once"; }

std::string_view to_string(AccessStrategy strategy) noexcept {
  return strategy == AccessStrategy::kRemotePartial ? "remote-partial" : "whole-file-local";
}

ClientConfig ClientConfig::from_json(const json& j) {
  ClientConfig c;
  c.self = j.value("self", c.self);
  c.catalogue_addr = j.at("catalogue_addr").get<std::string>();
  c.default_se = j.value("default_se", std::string());
  c.site = j.value("site", std::string());
  c.cache_dir = j.value("cache_dir", std::string());
  c.route = j.value("route", std::string());
  c.token = j.value("token", std::string());
  c.credential_ref = j.value("credential_ref", std::string());
  if (j.contains("ses")) c.ses = storage::SeDirectory::from_json(j["ses"]);
  c.max_redirects = j.value("max_redirects", c.max_redirects);
  if (!c.route.empty()) aiod::RouteChain::parse(c.route);
  return c;
}

std::pair<std::string, std::optional<std::string>> split_se_suffix(std::string_view target) {
  auto at = target.rfind('@');
  if (at == std::string_view::npos) return {std::string(target), std::nullopt};
  std::string lfn(target.substr(0, at));
  std::string se(target.substr(at + 1));
  if (lfn.find('@') != std::string::npos) fail(Errc::InvalidArgument, "an LFN may not contain '@'");
  if (se.empty()) fail(Errc::InvalidArgument, "empty storage element name in " + std::string(target));
  return {std::move(lfn), std::move(se)};
}

Pfn select_best_replica(const std::vector<ReplicaSite>& replicas, std::string_view client_site) {
  if (replicas.empty()) fail(Errc::InvalidArgument, "no replicas");
  for (const auto& r : replicas) {
    if (!client_site.empty() && r.site == client_site) return r.pfn;
  }
  return replicas.front().pfn;
}

int OpenFileTable::insert(std::shared_ptr<FileHandle> handle) {
  std::lock_guard lock(mu_);
  const int id = next_id_++;
  handle->id = id;
  handles_[id] = std::move(handle);
  return id;
}

std::shared_ptr<FileHandle> OpenFileTable::get(int id) const {
  std::lock_guard lock(mu_);
  auto it = handles_.find(id);
  if (it == handles_.end()) fail(Errc::BadHandle, "no open handle " + std::to_string(id));
  return it->second;
}

std::shared_ptr<FileHandle> OpenFileTable::take(int id) {
  std::lock_guard lock(mu_);
  auto it = handles_.find(id);
  if (it == handles_.end()) fail(Errc::BadHandle, "no open handle " + std::to_string(id));
  auto h = std::move(it->second);
  handles_.erase(it);
  return h;
}

std::vector<int> OpenFileTable::ids() const {
  std::lock_guard lock(mu_);
  std::vector<int> out;
  for (const auto& [id, h] : handles_) out.push_back(id);
  return out;
}

std::size_t OpenFileTable::size() const {
  std::lock_guard lock(mu_);
  return handles_.size();
}

GridClient::GridClient(wire::Network& net, ClientConfig config)
    : net_(net), config_(std::move(config)), catalogue_(net_, config_.self, config_.catalogue_addr, config_.token) {
  if (!config_.cache_dir.empty()) fs::create_directories(config_.cache_dir);
}

GridClient::~GridClient() {
  for (int id : table_.ids()) {
    try {
      auto h = table_.take(id);
      if (h->channel) h->channel->abort();
    } catch (...) {
    }
  }
}

std::string GridClient::credential_ref() {
  if (!config_.credential_ref.empty()) return config_.credential_ref;
  return "/" + catalogue_.whoami().user + "/.credential";
}

void GridClient::publish_credential() {
  const auto path = LfnPath::parse(credential_ref());
  try {
    catalogue_.stat(path);
    return;
  } catch (const Error& e) {
    if (e.code() != Errc::NotFound) throw;
  }
  catalogue_.put_inline(path, config_.token, PermissionBits(0600));
}

std::string GridClient::site_of(const Pfn& pfn) const {
  const auto* se = config_.ses.by_endpoint(pfn.endpoint());
  return se == nullptr ? std::string() : se->site;
}

aiod::RouteChain GridClient::route_for(const OpenOptions& options) const {
  if (options.route) return *options.route;
  if (config_.route.empty()) return {};
  return aiod::RouteChain::parse(config_.route);
}

aiod::AccessTicket GridClient::ticket_for(const LfnPath& lfn, const Guid& guid, const aiod::RouteChain& route) {
  aiod::AccessTicket t;
  t.route = route;
  t.grid_user = catalogue_.whoami().user;
  t.credential_ref = credential_ref();
  t.lfn = lfn.str();
  t.guid = guid;
  return t;
}

std::unique_ptr<aiod::DataChannel> GridClient::open_read_channel(const LfnPath& lfn, const catalogue::Resolved& r,
                                                                 const std::optional<std::string>& se,
                                                                 const aiod::RouteChain& route,
                                                                 const OpenOptions& options) {
  std::vector<Pfn> order;
  if (se) {
    const auto& addr = config_.ses.by_name(*se).address;
    for (const auto& p : r.pfns) {
      if (p.endpoint() == addr) order.push_back(p);
    }
    if (order.empty()) fail(Errc::NotFound, lfn.str() + " has no replica on " + *se);
  } else {
    std::vector<ReplicaSite> sites;
    for (const auto& p : r.pfns) sites.push_back({p, site_of(p)});
    order.push_back(select_best_replica(sites, config_.site));
    for (const auto& p : r.pfns) {
      if (p != order.front()) order.push_back(p);
    }
  }
  std::string last_error = "no replica";
  for (const auto& pfn : order) {
    try {
      if (route.empty()) return aiod::SeChannel::open_read(net_, config_.self, pfn, config_.token);
      auto ticket = ticket_for(lfn, r.guid, route);
      ticket.pfn = pfn;
      return aiod::AiodChannel::open(net_, config_.self, config_.token,
                                     {ticket, aiod::SessionMode::kRead, options.access, 0, 0, config_.max_redirects});
    } catch (const Error& e) {
      if (e.code() != Errc::TransportError && e.code() != Errc::Unreachable && e.code() != Errc::NotFound &&
          e.code() != Errc::LinkDown) {
        throw;
      }
      last_error = e.what();
    }
  }
  fail(Errc::Unreachable, "no replica of " + lfn.str() + " is reachable: " + last_error);
}

fs::path GridClient::stage_whole_file(const Guid& guid, std::uint64_t size, aiod::DataChannel& channel) {
  if (config_.cache_dir.empty()) fail(Errc::InvalidArgument, "whole-file access needs a cache_dir");
  const fs::path dest = config_.cache_dir / guid.to_string();
  std::error_code ec;
  if (fs::file_size(dest, ec) == size && !ec) return dest;
  const fs::path tmp = config_.cache_dir / ("." + guid.to_string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    for (std::uint64_t off = 0; off < size; off += kChunk) {
      auto data = channel.read(off, std::min(kChunk, size - off));
      out.write(data.data(), static_cast<std::streamsize>(data.size()));
    }
    if (!out) fail(Errc::BackendFailure, "cannot stage " + tmp.string());
  }
  fs::rename(tmp, dest);
  return dest;
}

int GridClient::open(std::string_view target, OpenMode mode, AccessStrategy strategy, const OpenOptions& options) {
  auto [lfn_text, se] = split_se_suffix(target);
  const LfnPath lfn = LfnPath::parse(lfn_text);
  const auto route = route_for(options);
  auto h = std::make_shared<FileHandle>();
  h->lfn = lfn;
  h->mode = mode;
  h->strategy = strategy;
  h->perms = options.perms;

  if (mode == OpenMode::kRead) {
    const auto r = catalogue_.resolve(lfn);
    h->guid = r.guid;
    h->size = r.size;
    h->channel = open_read_channel(lfn, r, se, route, options);
    if (strategy == AccessStrategy::kWholeFileLocal) {
      try {
        h->local = stage_whole_file(r.guid, r.size, *h->channel);
        h->channel->close();
      } catch (...) {
        h->channel->abort();
        throw;
      }
      h->fd = Fd(::open(h->local.c_str(), O_RDONLY | O_CLOEXEC));
      if (h->fd.get() < 0) io_fail("open", h->local);
    }
    return table_.insert(std::move(h));
  }

  const std::string se_name = se ? *se : config_.default_se;
  if (se_name.empty()) fail(Errc::InvalidArgument, "no target storage element and no default_se configured");
  const auto& se_info = config_.ses.by_name(se_name);
  h->guid = catalogue_.mint_guid(lfn);
  if (route.empty()) {
    h->channel = aiod::SeChannel::open_write(net_, config_.self, se_info.address, config_.token, h->guid,
                                             options.size_hint);
  } else {
    auto ticket = ticket_for(lfn, h->guid, route);
    ticket.se = se_info.address;
    h->channel = aiod::AiodChannel::open(
        net_, config_.self, config_.token,
        {ticket, aiod::SessionMode::kWrite, options.access, options.size_hint, 0, config_.max_redirects});
  }
  if (strategy == AccessStrategy::kWholeFileLocal) {
    if (config_.cache_dir.empty()) {
      h->channel->abort();
      fail(Errc::InvalidArgument, "whole-file access needs a cache_dir");
    }
    h->local = config_.cache_dir / (h->guid.to_string() + ".part");
    h->fd = Fd(::open(h->local.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600));
    if (h->fd.get() < 0) {
      h->channel->abort();
      io_fail("open", h->local);
    }
  }
  return table_.insert(std::move(h));
}

std::string GridClient::read(int handle, std::uint64_t offset, std::uint64_t size) {
  auto h = table_.get(handle);
  std::lock_guard lock(h->mu);
  if (h->mode != OpenMode::kRead) fail(Errc::BadHandle, "handle " + std::to_string(handle) + " is write-once");
  if (offset > h->size) {
    fail(Errc::RangeError, "offset " + std::to_string(offset) + " beyond " + std::to_string(h->size) + " bytes");
  }
  const std::uint64_t n = std::min(size, h->size - offset);
  if (n == 0) return {};
  if (h->strategy == AccessStrategy::kWholeFileLocal) return pread_exact(h->fd.get(), offset, n, h->local);
  return h->channel->read(offset, n);
}

std::uint64_t GridClient::write(int handle, std::uint64_t offset, std::string_view data) {
  auto h = table_.get(handle);
  std::lock_guard lock(h->mu);
  if (h->mode != OpenMode::kWriteOnce) fail(Errc::BadHandle, "handle " + std::to_string(handle) + " is read-only");
  if (offset != h->next_offset) {
    fail(Errc::NonSequentialWrite,
         "write at " + std::to_string(offset) + ", expected " + std::to_string(h->next_offset));
  }
  if (data.empty()) return 0;
  if (h->strategy == AccessStrategy::kWholeFileLocal) {
    write_all(h->fd.get(), data, h->local);
  } else {
    h->channel->write(offset, data);
  }
  h->next_offset += data.size();
  return data.size();
}

void GridClient::sync(int handle) {
  auto h = table_.get(handle);
  std::lock_guard lock(h->mu);
  if (h->mode != OpenMode::kWriteOnce) fail(Errc::BadHandle, "sync on a read handle");
  if (h->strategy == AccessStrategy::kWholeFileLocal) {
    if (::fsync(h->fd.get()) != 0) io_fail("fsync", h->local);
  } else {
    h->channel->sync();
  }
}

void GridClient::close(int handle) {
  auto h = table_.take(handle);
  std::lock_guard lock(h->mu);
  if (h->mode == OpenMode::kRead) {
    h->fd.reset();
    if (h->strategy == AccessStrategy::kRemotePartial) h->channel->close();
    return;
  }

  aiod::CommitResult stored;
  try {
    if (h->strategy == AccessStrategy::kWholeFileLocal) {
      h->fd.reset();
      Fd in(::open(h->local.c_str(), O_RDONLY | O_CLOEXEC));
      if (in.get() < 0) io_fail("open", h->local);
      for (std::uint64_t off = 0; off < h->next_offset; off += kChunk) {
        h->channel->write(off, pread_exact(in.get(), off, std::min(kChunk, h->next_offset - off), h->local));
      }
    }
    stored = h->channel->close();
  } catch (...) {
    h->channel->abort();
    if (!h->local.empty()) fs::remove(h->local);
    throw;
  }
  if (!h->local.empty()) fs::remove(h->local);
  if (stored.size != h->next_offset) {
    fail(Errc::SizeValidationFailed, "stored " + std::to_string(stored.size) + " bytes, wrote " +
                                         std::to_string(h->next_offset));
  }
  try {
    catalogue_.register_file(h->lfn, stored.pfn, stored.size, h->guid, h->perms);
  } catch (const Error& e) {
    try {
      storage::SeClient(net_, config_.self, stored.pfn.endpoint(), config_.token).rm(stored.pfn);
    } catch (...) {
    }
    fail(Errc::RegistrationFailed, "registering " + h->lfn.str() + ": " + e.what());
  }
}

void GridClient::abort(int handle) {
  auto h = table_.take(handle);
  std::lock_guard lock(h->mu);
  h->fd.reset();
  if (h->channel) h->channel->abort();
  if (h->mode == OpenMode::kWriteOnce && !h->local.empty()) {
    std::error_code ec;
    fs::remove(h->local, ec);
  }
}

HandleInfo GridClient::info(int handle) const {
  auto h = table_.get(handle);
  std::lock_guard lock(h->mu);
  return {h->id,
          h->lfn,
          h->guid,
          h->mode,
          h->strategy,
          h->channel ? h->channel->pfn() : Pfn{},
          h->channel ? h->channel->endpoint() : std::string(),
          h->size,
          h->next_offset};
}

std::uint64_t aioget(GridClient& client, std::string_view lfn, const fs::path& local,
                     const std::optional<aiod::RouteChain>& route) {
  OpenOptions opts;
  opts.route = route;
  const int h = client.open(lfn, OpenMode::kRead, AccessStrategy::kRemotePartial, opts);
  const fs::path tmp = local.string() + ".aioget";
  std::uint64_t total = 0;
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::BackendFailure, "cannot write " + tmp.string());
    const std::uint64_t size = client.info(h).size;
    while (total < size) {
      auto data = client.read(h, total, kChunk);
      out.write(data.data(), static_cast<std::streamsize>(data.size()));
      total += data.size();
    }
    out.close();
    if (!out) fail(Errc::BackendFailure, "cannot write " + tmp.string());
    client.close(h);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    try {
      client.close(h);
    } catch (...) {
    }
    throw;
  }
  fs::rename(tmp, local);
  return total;
}

std::uint64_t aioput(GridClient& client, const fs::path& local, std::string_view target,
                     const std::optional<aiod::RouteChain>& route) {
  std::ifstream in(local, std::ios::binary);
  if (!in) fail(Errc::NotFound, "cannot read " + local.string());
  OpenOptions opts;
  opts.route = route;
  opts.size_hint = fs::file_size(local);
  const int h = client.open(target, OpenMode::kWriteOnce, AccessStrategy::kRemotePartial, opts);
  std::uint64_t total = 0;
  try {
    std::string buf(kChunk, '\0');
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      const auto n = static_cast<std::size_t>(in.gcount());
      if (n == 0) break;
      total += client.write(h, total, std::string_view(buf.data(), n));
    }
  } catch (...) {
    client.abort(h);
    throw;
  }
  client.close(h);
  return total;
}

}  // namespace gridfs::access
