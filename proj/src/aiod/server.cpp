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

#include "gridfs/aiod/server.hpp"

#include <fstream>

#include "gridfs/catalogue/service.hpp"
#include "gridfs/common/error.hpp"

namespace gridfs::aiod {
namespace fs = std::filesystem;

using wire::make_ok;
using wire::Message;

namespace {

bool is_transport_failure(Errc code) {
  return code == Errc::TransportError || code == Errc::Unreachable || code == Errc::LinkDown || code == Errc::NoRoute;
}


constexpr std::int64_t kTrafficWindowUs = 10'000'000;
const std::set<std::string> kRoles = {"io_gatekeeper", "cache_gatekeeper", "slave_io", "slave_cache"};

}  // namespace

struct AiodServer::Session {
  std::mutex mu;
  std::string id;
  SessionMode mode = SessionMode::kRead;
  AccessTicket ticket;
  AccessKind access = AccessKind::kSequential;
  std::uint64_t size = 0;
  std::uint64_t page_size = 0;
  std::unique_ptr<DataChannel> downstream;  // null while a warm read session has no path to the source
  std::string token;
  std::size_t hop = 0;
  TokenBucket bucket;
  std::uint64_t next_offset = 0;
  fs::path staging;
  std::ofstream out;
};

void AiodConfig::validate() const {
  if (listen.empty()) fail(Errc::InvalidArgument, "aiod needs a listen address");
  for (const auto& r : roles) {
    if (kRoles.count(r) == 0) fail(Errc::InvalidArgument, "unknown aiod role '" + r + "'");
  }
  if ((has_role("io_gatekeeper") || has_role("cache_gatekeeper")) && slaves.empty()) {
    fail(Errc::InvalidArgument, "gatekeeper role needs slaves");
  }
}

AiodConfig AiodConfig::from_json(const json& j) {
  AiodConfig c;
  c.listen = j.at("listen").get<std::string>();
  for (const auto& r : j.value("roles", json::array())) c.roles.insert(r.get<std::string>());
  c.slaves = j.value("slaves", std::vector<std::string>{});
  c.gatekeeper = j.value("gatekeeper", std::string());
  c.catalogue_addr = j.at("catalogue_addr").get<std::string>();
  c.cache_dir = j.at("cache_dir").get<std::string>();
  c.cache_budget_bytes = j.value("cache_budget_bytes", c.cache_budget_bytes);
  c.rate_limit = j.value("rate_limit", c.rate_limit);
  c.burst_bytes = j.value("burst_bytes", c.burst_bytes);
  c.staleness_s = j.value("staleness_s", c.staleness_s);
  c.locate_deadline_ms = j.value("locate_deadline_ms", c.locate_deadline_ms);
  c.max_redirects = j.value("max_redirects", c.max_redirects);
  c.validate();
  return c;
}

json AiodConfig::to_json() const {
  return {{"listen", listen},
          {"roles", roles},
          {"slaves", slaves},
          {"gatekeeper", gatekeeper},
          {"catalogue_addr", catalogue_addr},
          {"cache_dir", cache_dir.string()},
          {"cache_budget_bytes", cache_budget_bytes},
          {"rate_limit", rate_limit},
          {"burst_bytes", burst_bytes},
          {"staleness_s", staleness_s},
          {"locate_deadline_ms", locate_deadline_ms},
          {"max_redirects", max_redirects}};
}

json AiodStats::to_json() const {
  return {{"next_hop_fetches", next_hop_fetches}, {"page_hits", page_hits},
          {"page_misses", page_misses},           {"sessions_opened", sessions_opened},
          {"redirects_issued", redirects_issued}, {"bytes_served", bytes_served},
          {"bytes_received", bytes_received}};
}

AiodServer::AiodServer(wire::Network& net, AiodConfig config)
    : net_(net), config_((config.validate(), std::move(config))), pages_(config_.cache_dir / "pages", config_.cache_budget_bytes) {
  fs::create_directories(config_.cache_dir / "staging");
  for (const auto& e : fs::directory_iterator(config_.cache_dir / "staging")) fs::remove_all(e.path());

  auto& d = dispatch_;
  d.on("OPEN", [this](const auto&, const Message& m) { return make_ok(open(m)); });
  d.on("READ", [this](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    auto s = session(a);
    std::lock_guard lock(s->mu);
    if (s->mode != SessionMode::kRead) fail(Errc::BadHandle, "session is open for writing");
    auto data = read(*s, a.at("offset").get<std::uint64_t>(), a.at("length").get<std::uint64_t>());
    throttle(*s, data.size());
    bytes_served_ += data.size();
    note_traffic(data.size());
    auto n = data.size();
    return make_ok(n, seal_page(s->ticket.encryption, std::move(data)));
  });
  d.on("WRITE", [this](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    auto s = session(a);
    std::lock_guard lock(s->mu);
    if (s->mode != SessionMode::kWrite) fail(Errc::BadHandle, "session is open for reading");
    const auto offset = a.at("offset").get<std::uint64_t>();
    if (offset != s->next_offset) {
      fail(Errc::NonSequentialWrite,
           "write at " + std::to_string(offset) + ", expected " + std::to_string(s->next_offset));
    }
    std::string data = open_page(s->ticket.encryption, m.data);
    throttle(*s, data.size());
    s->downstream->write(offset, data);
    s->out.write(data.data(), static_cast<std::streamsize>(data.size()));
    s->next_offset += data.size();
    bytes_received_ += data.size();
    note_traffic(data.size());
    return make_ok(data.size());
  });
  d.on("SYNC", [this](const auto&, const Message& m) {
    auto s = session(wire::args_of(m));
    std::lock_guard lock(s->mu);
    if (s->mode == SessionMode::kWrite) {
      s->out.flush();
      s->downstream->sync();
    }
    return make_ok(nullptr);
  });
  d.on("CLOSE", [this](const auto&, const Message& m) {
    auto s = session(wire::args_of(m));
    std::lock_guard lock(s->mu);
    json result = nullptr;
    try {
      if (s->mode == SessionMode::kRead) {
        if (s->downstream) s->downstream->close();
      } else {
        auto commit = s->downstream->close();
        s->out.close();
        // Keep the written file as warm pages.
        std::ifstream in(s->staging, std::ios::binary);
        const auto page = page_size_for(commit.size, AccessKind::kSequential);
        for (const auto& p : covering_pages(0, commit.size, commit.size, page)) {
          std::string buf(p.length, '\0');
          in.read(buf.data(), static_cast<std::streamsize>(p.length));
          pages_.insert(s->ticket.guid, p.offset, buf);
        }
        result = {{"pfn", commit.pfn.str()}, {"size", commit.size}};
      }
    } catch (...) {
      if (s->downstream) s->downstream->abort();
      end_session(s->id);
      throw;
    }
    end_session(s->id);
    return make_ok(std::move(result));
  });
  d.on("ABORT", [this](const auto&, const Message& m) {
    auto s = session(wire::args_of(m));
    std::lock_guard lock(s->mu);
    if (s->downstream) s->downstream->abort();
    end_session(s->id);
    return make_ok(nullptr);
  });
  d.on("PRELOAD", [this](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    auto s = session(a);
    std::lock_guard lock(s->mu);
    if (s->mode != SessionMode::kRead) fail(Errc::BadHandle, "preload needs a read session");
    json failed = json::array();
    for (const auto& r : a.at("ranges")) {
      const auto off = r.at(0).get<std::uint64_t>();
      const auto len = r.at(1).get<std::uint64_t>();
      try {
        read(*s, off, len);
      } catch (const Error&) {
        failed.push_back({off, len});
      }
    }
    return make_ok({{"failed", failed}});
  });
  d.on("LOCATE_GUID", [this](const auto&, const Message& m) {
    return make_ok(pages_.holds(Guid::parse(wire::args_of(m).at("guid").get<std::string>())));
  });
  d.on("LOAD_REPORT", [this](const auto&, const Message& m) {
    ingest(LoadReport::from_json(wire::args_of(m)));
    return make_ok(nullptr);
  });
  d.on("STATS", [this](const auto&, const Message&) {
    json j = stats().to_json();
    j["open_sessions"] = open_sessions();
    j["cached_bytes"] = pages_.bytes();
    return make_ok(std::move(j));
  });
}

AiodServer::~AiodServer() {
  std::lock_guard lock(mu_);
  for (auto& [id, s] : sessions_) {
    if (s->downstream) s->downstream->abort();
  }
}

wire::Message AiodServer::handle(const wire::Address& caller, const wire::Message& request) {
  return dispatch_.handle(caller, request);
}

void AiodServer::validate(const AccessTicket& t, SessionMode mode, const std::string& token,
                          std::uint64_t& size_out) {
  catalogue::CatalogueClient cat(net_, config_.listen, config_.catalogue_addr, token);
  try {
    if (cat.whoami().user != t.grid_user) fail(Errc::TicketInvalid, "ticket user does not match credentials");
  } catch (const Error& e) {
    if (e.code() == Errc::Unauthenticated) fail(Errc::TicketInvalid, "unknown credentials");
    throw;
  }
  try {
    if (cat.read_inline(catalogue::LfnPath::parse(t.credential_ref)) != token) {
      fail(Errc::TicketInvalid, "credential at " + t.credential_ref + " does not match");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::TicketInvalid || e.code() == Errc::TransportError) throw;
    fail(Errc::TicketInvalid, "credential " + t.credential_ref + ": " + e.message());
  }
  const auto lfn = catalogue::LfnPath::parse(t.lfn);
  if (mode == SessionMode::kRead) {
    catalogue::Resolved r;
    try {
      r = cat.resolve(lfn);
    } catch (const Error& e) {
      if (e.code() == Errc::NotFound) fail(Errc::TicketInvalid, "no such file " + t.lfn);
      throw;
    }
    if (r.guid != t.guid) fail(Errc::TicketInvalid, "guid does not belong to " + t.lfn);
    if (!t.pfn || std::find(r.pfns.begin(), r.pfns.end(), *t.pfn) == r.pfns.end()) {
      fail(Errc::TicketInvalid, "pfn is not a replica of " + t.lfn);
    }
    size_out = r.size;
  } else {
    if (!cat.is_pending(lfn, t.guid)) fail(Errc::TicketInvalid, "guid was not minted for " + t.lfn);
    if (t.se.empty()) fail(Errc::TicketInvalid, "write ticket names no storage element");
    size_out = 0;
  }
}

json AiodServer::open(const wire::Message& m) {
  const auto& a = wire::args_of(m);
  const std::string token = wire::auth_of(m);
  AccessTicket ticket = AccessTicket::from_json(a.at("ticket"));
  const auto mode = session_mode_from_string(a.at("mode").get<std::string>());
  const auto access = access_kind_from_string(a.value("access", std::string("sequential")));
  const auto hop = a.value("hop", std::size_t{0});
  const auto size_hint = a.value("size_hint", std::uint64_t{0});
  if (hop >= ticket.route.size() || ticket.route[hop] != config_.listen) {
    fail(Errc::TicketInvalid, "route does not pass through " + config_.listen);
  }

  std::uint64_t size = 0;
  validate(ticket, mode, token, size);

  if (mode == SessionMode::kRead && config_.has_role("cache_gatekeeper")) {
    if (auto holder = locate_guid(ticket.guid); holder && *holder != config_.listen) {
      ++redirects_issued_;
      throw Error::redirect(*holder);
    }
  }
  if (config_.has_role("io_gatekeeper")) {
    try {
      auto slave = pick_slave();
      if (slave != config_.listen) {
        ++redirects_issued_;
        throw Error::redirect(slave);
      }
    } catch (const Error& e) {
      if (e.code() != Errc::NoFreshReports) throw;
    }
  }

  auto s = std::make_shared<Session>();
  s->mode = mode;
  s->ticket = ticket;
  s->access = access;
  s->size = size;
  s->page_size = page_size_for(size, access);
  const std::uint64_t burst = config_.burst_bytes > 0 ? config_.burst_bytes : config_.rate_limit / 10;
  s->bucket = TokenBucket(config_.rate_limit, burst, net_.now_us());

  s->token = token;
  s->hop = hop;
  if (mode == SessionMode::kRead) {
    try {
      open_downstream(*s, size_hint);
    } catch (const Error& e) {
      if (!is_transport_failure(e.code()) || !pages_.holds(ticket.guid)) throw;
    }
  } else {
    open_downstream(*s, size_hint);
  }

  {
    std::lock_guard lock(mu_);
    s->id = config_.listen + "/" + std::to_string(next_session_++);
    if (mode == SessionMode::kWrite) {
      s->staging = config_.cache_dir / "staging" / std::to_string(next_session_);
      s->out.open(s->staging, std::ios::binary | std::ios::trunc);
    }
    sessions_[s->id] = s;
  }
  ++sessions_opened_;
  return {{"session", s->id},
          {"size", size},
          {"page_size", s->page_size},
          {"pfn", s->downstream ? s->downstream->pfn().str() : ticket.pfn->str()},
          {"server", config_.listen}};
}

void AiodServer::open_downstream(Session& s, std::uint64_t size_hint) {
  const auto& t = s.ticket;
  if (s.hop + 1 < t.route.size()) {
    AiodOpen next{t, s.mode, s.access, size_hint, s.hop + 1, config_.max_redirects};
    s.downstream = AiodChannel::open(net_, config_.listen, s.token, std::move(next));
  } else if (s.mode == SessionMode::kRead) {
    s.downstream = SeChannel::open_read(net_, config_.listen, *t.pfn, s.token);
  } else {
    s.downstream = SeChannel::open_write(net_, config_.listen, t.se, s.token, t.guid, size_hint);
  }
}

std::shared_ptr<AiodServer::Session> AiodServer::session(const json& args) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(args.at("session").get<std::string>());
  if (it == sessions_.end()) fail(Errc::BadHandle, "no such session");
  return it->second;
}

void AiodServer::end_session(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    s = it->second;
    sessions_.erase(it);
  }
  if (!s->staging.empty()) {
    s->out.close();
    std::error_code ec;
    fs::remove(s->staging, ec);
  }
}

std::string AiodServer::read(Session& s, std::uint64_t offset, std::uint64_t length) {
  if (offset > s.size) {
    fail(Errc::RangeError, "offset " + std::to_string(offset) + " beyond " + std::to_string(s.size) + " bytes");
  }
  length = std::min(length, s.size - offset);
  std::string out;
  out.reserve(length);
  for (const auto& p : covering_pages(offset, length, s.size, s.page_size)) {
    bool hit = false;
    auto page = pages_.get_or_fetch(
        s.ticket.guid, p.offset, p.length,
        [&] {
          ++next_hop_fetches_;
          if (!s.downstream) open_downstream(s, 0);
          return s.downstream->read(p.offset, p.length);
        },
        &hit);
    ++(hit ? page_hits_ : page_misses_);
    const std::uint64_t from = std::max(offset, p.offset) - p.offset;
    const std::uint64_t to = std::min(offset + length, p.offset + p.length) - p.offset;
    out.append(page, from, to - from);
  }
  return out;
}

void AiodServer::throttle(Session& s, std::uint64_t bytes) {
  const auto delay = s.bucket.take(bytes, net_.now_us());
  if (delay > 0) net_.sleep_us(delay);
}

void AiodServer::note_traffic(std::uint64_t bytes) {
  std::lock_guard lock(mu_);
  const auto now = net_.now_us();
  traffic_.emplace_back(now, bytes);
  while (!traffic_.empty() && traffic_.front().first < now - kTrafficWindowUs) traffic_.pop_front();
}

AiodStats AiodServer::stats() const {
  return {next_hop_fetches_, page_hits_, page_misses_, sessions_opened_, redirects_issued_, bytes_served_,
          bytes_received_};
}

std::size_t AiodServer::open_sessions() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

LoadReport AiodServer::current_load() {
  std::lock_guard lock(mu_);
  const auto now = net_.now_us();
  std::uint64_t recent = 0;
  for (const auto& [t, b] : traffic_) {
    if (t >= now - kTrafficWindowUs) recent += b;
  }
  return {config_.listen, sessions_.size(), static_cast<double>(recent) * 1e6 / kTrafficWindowUs, now};
}

void AiodServer::report_load() {
  if (config_.gatekeeper.empty()) return;
  wire::rpc(net_, config_.listen, config_.gatekeeper, "LOAD_REPORT", current_load().to_json(), "");
}

void AiodServer::ingest(const LoadReport& report) {
  std::lock_guard lock(mu_);
  if (std::find(config_.slaves.begin(), config_.slaves.end(), report.server) == config_.slaves.end()) {
    fail(Errc::InvalidArgument, report.server + " is not a slave of " + config_.listen);
  }
  auto& slot = reports_[report.server];
  if (report.timestamp_us >= slot.timestamp_us) slot = report;
}

wire::Address AiodServer::pick_slave() {
  std::vector<LoadReport> reports;
  {
    std::lock_guard lock(mu_);
    for (const auto& [addr, r] : reports_) reports.push_back(r);
  }
  return pick_io_slave(reports, net_.now_us(), config_.staleness_s * 1'000'000, config_.rate_limit);
}

std::optional<wire::Address> AiodServer::locate_guid(const Guid& guid) {
  const auto& slaves = config_.slaves;
  std::vector<char> found(slaves.size(), 0);
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < slaves.size(); ++i) {
    tasks.push_back([this, &found, &slaves, i, &guid] {
      try {
        if (slaves[i] == config_.listen) {
          found[i] = pages_.holds(guid);
        } else {
          found[i] = wire::rpc(net_, config_.listen, slaves[i], "LOCATE_GUID", {{"guid", guid.to_string()}}, "")
                         .value.get<bool>();
        }
      } catch (const Error&) {
      }
    });
  }
  const auto start = net_.now_us();
  const auto deadline = start + config_.locate_deadline_ms * 1000;
  auto done = net_.run_concurrently(std::move(tasks));
  std::optional<std::size_t> best;
  std::int64_t latest = start;
  for (std::size_t i = 0; i < slaves.size(); ++i) {
    if (done[i] > deadline) continue;
    latest = std::max(latest, done[i]);
    if (found[i] && (!best || done[i] < done[*best])) best = i;
  }
  // Answer as soon as the first holder replies, else when everyone has.
  net_.advance_to(best ? done[*best] : std::min(deadline, latest));
  if (!best) return std::nullopt;
  return slaves[*best];
}

AiodStats fetch_stats(wire::Network& net, const wire::Address& self, const wire::Address& server) {
  auto v = wire::rpc(net, self, server, "STATS", json::object(), "").value;
  return {v.at("next_hop_fetches").get<std::uint64_t>(), v.at("page_hits").get<std::uint64_t>(),
          v.at("page_misses").get<std::uint64_t>(),      v.at("sessions_opened").get<std::uint64_t>(),
          v.at("redirects_issued").get<std::uint64_t>(), v.at("bytes_served").get<std::uint64_t>(),
          v.at("bytes_received").get<std::uint64_t>()};
}

}  // namespace gridfs::aiod
