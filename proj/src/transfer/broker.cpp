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

#include "gridfs/transfer/broker.hpp"

#include "gridfs/aiod/channel.hpp"
#include "gridfs/common/error.hpp"

namespace gridfs::transfer {

using catalogue::LfnPath;
using catalogue::Pfn;
using wire::make_ok;
using wire::Message;

namespace {

constexpr std::uint64_t kChunk = 4ull << 20;
constexpr std::uint64_t kSnapshotEvery = 256;

}  // namespace

std::string_view to_string(TransferKind kind) noexcept { return kind == TransferKind::kMove ? "move" : "replicate"; }

std::string_view to_string(TransferState state) noexcept {
  switch (state) {
    case TransferState::kQueued:
      return "queued";
    case TransferState::kRunning:
      return "running";
    case TransferState::kDone:
      return "done";
    case TransferState::kFailed:
      return "failed";
  }
  return "queued";
}

TransferKind transfer_kind_from_string(std::string_view text) {
  if (text == "replicate") return TransferKind::kReplicate;
  if (text == "move") return TransferKind::kMove;
  fail(Errc::InvalidArgument, "unknown transfer kind '" + std::string(text) + "'");
}

TransferState transfer_state_from_string(std::string_view text) {
  for (auto s : {TransferState::kQueued, TransferState::kRunning, TransferState::kDone, TransferState::kFailed}) {
    if (to_string(s) == text) return s;
  }
  fail(Errc::InvalidArgument, "unknown transfer state '" + std::string(text) + "'");
}

json TransferRequest::to_json() const {
  json j = {{"id", id},         {"lfn", lfn},       {"src_se", src_se},     {"dst_se", dst_se},
            {"kind", to_string(kind)}, {"state", to_string(state)}, {"attempts", attempts}, {"owner", owner}};
  if (last_error) j["last_error"] = *last_error;
  return j;
}

TransferRequest TransferRequest::from_json(const json& j) {
  TransferRequest r;
  r.id = j.at("id").get<std::uint64_t>();
  r.lfn = j.at("lfn").get<std::string>();
  r.src_se = j.value("src_se", std::string("any"));
  r.dst_se = j.at("dst_se").get<std::string>();
  r.kind = transfer_kind_from_string(j.at("kind").get<std::string>());
  r.state = transfer_state_from_string(j.at("state").get<std::string>());
  r.attempts = j.value("attempts", 0u);
  r.owner = j.value("owner", std::string());
  if (j.contains("last_error")) r.last_error = j["last_error"].get<std::string>();
  return r;
}

TransferQueue::TransferQueue(std::optional<std::filesystem::path> journal) {
  if (!journal) return;
  journal_ = std::make_unique<Journal>(*journal);
  replaying_ = true;
  std::uint64_t after = 0;
  if (auto snap = journal_->read_snapshot()) {
    after = snap->seq;
    for (const auto& line : snap->lines) {
      auto r = TransferRequest::from_json(line);
      next_id_ = std::max(next_id_, r.id + 1);
      requests_[r.id] = std::move(r);
    }
  }
  for (const auto& rec : journal_->records_after(after)) apply(rec);
  // A request that was running when the process died did not finish.
  for (auto& [id, r] : requests_) {
    if (r.state == TransferState::kRunning) {
      r.state = TransferState::kFailed;
      r.last_error = "interrupted";
    }
  }
  replaying_ = false;
}

void TransferQueue::apply(const json& rec) {
  const auto& op = rec.at("op");
  if (op == "enqueue") {
    auto r = TransferRequest::from_json(rec.at("request"));
    next_id_ = std::max(next_id_, r.id + 1);
    requests_[r.id] = std::move(r);
  } else if (op == "state") {
    auto it = requests_.find(rec.at("id").get<std::uint64_t>());
    if (it == requests_.end()) return;
    it->second.state = transfer_state_from_string(rec.at("state").get<std::string>());
    it->second.attempts = rec.at("attempts").get<std::uint32_t>();
    if (rec.contains("last_error")) {
      it->second.last_error = rec["last_error"].get<std::string>();
    } else {
      it->second.last_error.reset();
    }
  }
}

void TransferQueue::log(json record) {
  if (!journal_ || replaying_) return;
  journal_->append(std::move(record));
  if (++since_snapshot_ >= kSnapshotEvery) {
    since_snapshot_ = 0;
    std::vector<json> lines;
    for (const auto& [id, r] : requests_) lines.push_back(r.to_json());
    journal_->write_snapshot(lines);
  }
}

std::uint64_t TransferQueue::enqueue(const std::string& owner, const std::string& lfn, const std::string& src_se,
                                     const std::string& dst_se, TransferKind kind) {
  std::lock_guard lock(mu_);
  TransferRequest r;
  r.id = next_id_++;
  r.lfn = lfn;
  r.src_se = src_se;
  r.dst_se = dst_se;
  r.kind = kind;
  r.owner = owner;
  requests_[r.id] = r;
  log({{"op", "enqueue"}, {"request", r.to_json()}});
  return r.id;
}

TransferRequest TransferQueue::query(std::uint64_t id) const {
  std::lock_guard lock(mu_);
  auto it = requests_.find(id);
  if (it == requests_.end()) fail(Errc::NotFound, "no transfer request " + std::to_string(id));
  return it->second;
}

std::vector<TransferRequest> TransferQueue::list() const {
  std::lock_guard lock(mu_);
  std::vector<TransferRequest> out;
  for (const auto& [id, r] : requests_) out.push_back(r);
  return out;
}

void TransferQueue::set_state(TransferRequest& r, TransferState to, std::optional<std::string> error) {
  r.state = to;
  r.last_error = std::move(error);
  json rec = {{"op", "state"}, {"id", r.id}, {"state", to_string(to)}, {"attempts", r.attempts}};
  if (r.last_error) rec["last_error"] = *r.last_error;
  log(std::move(rec));
}

std::vector<TransferRequest> TransferQueue::start(std::size_t n) {
  std::lock_guard lock(mu_);
  std::vector<TransferRequest> out;
  for (auto& [id, r] : requests_) {
    if (out.size() >= n) break;
    if (r.state != TransferState::kQueued) continue;
    ++r.attempts;
    set_state(r, TransferState::kRunning, r.last_error);
    out.push_back(r);
  }
  return out;
}

void TransferQueue::finish(std::uint64_t id, bool ok, std::optional<std::string> error) {
  std::lock_guard lock(mu_);
  auto& r = requests_.at(id);
  if (r.state != TransferState::kRunning) fail(Errc::InvalidArgument, "request " + std::to_string(id) + " is not running");
  set_state(r, ok ? TransferState::kDone : TransferState::kFailed, std::move(error));
}

std::vector<std::uint64_t> TransferQueue::requeue_failed(std::uint32_t retry_limit) {
  std::lock_guard lock(mu_);
  std::vector<std::uint64_t> out;
  for (auto& [id, r] : requests_) {
    if (r.state == TransferState::kFailed && r.attempts < retry_limit) {
      set_state(r, TransferState::kQueued, r.last_error);
      out.push_back(id);
    }
  }
  return out;
}

BrokerConfig BrokerConfig::from_json(const json& j) {
  BrokerConfig c;
  c.listen = j.value("listen", c.listen);
  c.catalogue_addr = j.at("catalogue_addr").get<std::string>();
  c.token = j.value("token", std::string());
  c.max_concurrent = j.value("max_concurrent", c.max_concurrent);
  c.retry_limit = j.value("retry_limit", c.retry_limit);
  if (j.contains("journal")) c.journal = j["journal"].get<std::string>();
  if (j.contains("ses")) c.ses = storage::SeDirectory::from_json(j["ses"]);
  if (c.max_concurrent == 0) fail(Errc::InvalidArgument, "max_concurrent must be positive");
  return c;
}

TransferBroker::TransferBroker(wire::Network& net, BrokerConfig config)
    : net_(net),
      config_(std::move(config)),
      queue_(config_.journal),
      catalogue_(net_, config_.listen, config_.catalogue_addr, config_.token) {}

catalogue::Principal TransferBroker::authenticate(const std::string& token) {
  catalogue::CatalogueClient as_user(net_, config_.listen, config_.catalogue_addr, token);
  return as_user.whoami();
}

std::uint64_t TransferBroker::enqueue(const std::string& requester_token, const std::string& lfn_text,
                                      const std::string& dst_se, TransferKind kind, const std::string& src_se) {
  catalogue::CatalogueClient as_user(net_, config_.listen, config_.catalogue_addr, requester_token);
  const auto& who = as_user.whoami();
  const auto lfn = LfnPath::parse(lfn_text);
  const auto resolved = as_user.resolve(lfn);
  const auto& dst = config_.ses.by_name(dst_se);
  if (src_se != "any") config_.ses.by_name(src_se);
  for (const auto& p : resolved.pfns) {
    if (p.endpoint() == dst.address) fail(Errc::AlreadyReplicated, lfn.str() + " already has a copy on " + dst_se);
  }
  if (kind == TransferKind::kMove) {
    const auto st = as_user.stat(lfn);
    if (!catalogue::permits(who, st.owner, st.group, st.perms, 2)) {
      fail(Errc::PermissionDenied, who.user + " may not move replicas of " + lfn.str());
    }
  }
  return queue_.enqueue(who.user, lfn.str(), src_se, dst_se, kind);
}

std::vector<std::uint64_t> TransferBroker::step() {
  queue_.requeue_failed(config_.retry_limit);
  auto batch = queue_.start(config_.max_concurrent);
  std::vector<std::optional<std::string>> errors(batch.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    tasks.push_back([this, &batch, &errors, i] {
      try {
        execute(batch[i]);
      } catch (const Error& e) {
        errors[i] = std::string(to_string(e.code())) + ": " + e.message();
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
  }
  const auto done = net_.run_concurrently(std::move(tasks));
  if (!done.empty()) net_.advance_to(*std::max_element(done.begin(), done.end()));
  std::vector<std::uint64_t> ids;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    queue_.finish(batch[i].id, !errors[i], errors[i]);
    ids.push_back(batch[i].id);
  }
  return ids;
}

void TransferBroker::execute(const TransferRequest& req) {
  const auto lfn = LfnPath::parse(req.lfn);
  const auto resolved = catalogue_.resolve(lfn);
  const auto& dst = config_.ses.by_name(req.dst_se);

  std::optional<Pfn> existing;
  for (const auto& p : resolved.pfns) {
    if (p.endpoint() == dst.address) existing = p;
  }

  std::vector<Pfn> sources;
  for (const auto& p : resolved.pfns) {
    if (p.endpoint() == dst.address) continue;
    if (req.src_se != "any" && p.endpoint() != config_.ses.by_name(req.src_se).address) continue;
    sources.push_back(p);
  }

  if (existing) {
    // An earlier attempt registered the copy; only a move has work left.
    if (req.kind == TransferKind::kMove) {
      for (const auto& src : sources) {
        catalogue_.remove_replica(lfn, src);
        try {
          storage::SeClient(net_, config_.listen, src.endpoint(), config_.token).rm(src);
        } catch (const Error&) {
        }
      }
    }
    return;
  }
  if (sources.empty()) fail(Errc::NotFound, "no source replica of " + req.lfn);

  std::unique_ptr<aiod::SeChannel> in;
  std::string last_error;
  for (const auto& src : sources) {
    try {
      in = aiod::SeChannel::open_read(net_, config_.listen, src, config_.token);
      break;
    } catch (const Error& e) {
      if (e.code() != Errc::TransportError && e.code() != Errc::NotFound) throw;
      last_error = e.what();
    }
  }
  if (!in) fail(Errc::Unreachable, "no source replica of " + req.lfn + " reachable: " + last_error);
  const Pfn src = in->pfn();

  // Fresh stored name: an interrupted attempt may still hold the GUID path.
  auto out = aiod::SeChannel::open_write(net_, config_.listen, dst.address, config_.token, std::nullopt, resolved.size);
  aiod::CommitResult stored;
  try {
    for (std::uint64_t off = 0; off < resolved.size; off += kChunk) {
      out->write(off, in->read(off, std::min(kChunk, resolved.size - off)));
    }
    stored = out->close();
  } catch (...) {
    out->abort();
    throw;
  }
  storage::SeClient dst_client(net_, config_.listen, dst.address, config_.token);
  if (stored.size != resolved.size) {
    dst_client.rm(stored.pfn);
    fail(Errc::SizeMismatch, "destination holds " + std::to_string(stored.size) + " bytes");
  }
  try {
    catalogue_.add_replica(lfn, stored.pfn, stored.size);
  } catch (const Error& e) {
    // A lost reply may still have registered the copy; the retry sees it.
    if (e.code() != Errc::TransportError) {
      try {
        dst_client.rm(stored.pfn);
      } catch (const Error&) {
      }
    }
    throw;
  }
  if (req.kind == TransferKind::kMove) {
    catalogue_.remove_replica(lfn, src);
    try {
      storage::SeClient(net_, config_.listen, src.endpoint(), config_.token).rm(src);
    } catch (const Error&) {
    }
  }
}

TransferService::TransferService(TransferBroker& broker) : broker_(broker) {
  auto* b = &broker_;
  dispatch_.on("enqueue", [b](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    return make_ok(b->enqueue(wire::auth_of(m), a.at("lfn").get<std::string>(), a.at("dst_se").get<std::string>(),
                              transfer_kind_from_string(a.value("kind", std::string("replicate"))),
                              a.value("src_se", std::string("any"))));
  });
  dispatch_.on("query", [b](const auto&, const Message& m) {
    return make_ok(b->query(wire::args_of(m).at("id").get<std::uint64_t>()).to_json());
  });
  dispatch_.on("list", [b](const auto&, const Message&) {
    json out = json::array();
    for (const auto& r : b->list()) out.push_back(r.to_json());
    return make_ok(std::move(out));
  });
  dispatch_.on("step", [b](const auto&, const Message&) { return make_ok(b->step()); });
}

wire::Message TransferService::handle(const wire::Address& caller, const wire::Message& request) {
  try {
    broker_.authenticate(wire::auth_of(request));
  } catch (const Error& e) {
    return wire::make_error(e);
  }
  return dispatch_.handle(caller, request);
}

TransferClient::TransferClient(wire::Network& net, wire::Address self, wire::Address broker, std::string token)
    : net_(net), self_(std::move(self)), broker_(std::move(broker)), token_(std::move(token)) {}

json TransferClient::call(std::string_view op, json args) {
  return wire::rpc(net_, self_, broker_, op, std::move(args), token_).value;
}

std::uint64_t TransferClient::enqueue(const std::string& lfn, const std::string& dst_se, TransferKind kind,
                                      const std::string& src_se) {
  return call("enqueue", {{"lfn", lfn}, {"dst_se", dst_se}, {"kind", to_string(kind)}, {"src_se", src_se}})
      .get<std::uint64_t>();
}

TransferRequest TransferClient::query(std::uint64_t id) { return TransferRequest::from_json(call("query", {{"id", id}})); }

std::vector<TransferRequest> TransferClient::list() {
  std::vector<TransferRequest> out;
  for (const auto& r : call("list", json::object())) out.push_back(TransferRequest::from_json(r));
  return out;
}

std::vector<std::uint64_t> TransferClient::step() { return call("step", json::object()).get<std::vector<std::uint64_t>>(); }

}  // namespace gridfs::transfer
