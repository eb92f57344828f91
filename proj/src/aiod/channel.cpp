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

#include "gridfs/aiod/channel.hpp"

#include "gridfs/common/error.hpp"

namespace gridfs::aiod {

using catalogue::Pfn;

SeChannel::SeChannel(storage::SeClient se, Pfn pfn, std::string upload)
    : se_(std::move(se)), pfn_(std::move(pfn)), upload_(std::move(upload)) {}

std::unique_ptr<SeChannel> SeChannel::open_read(wire::Network& net, wire::Address self, const Pfn& pfn,
                                                std::string token) {
  storage::SeClient se(net, std::move(self), pfn.endpoint(), std::move(token));
  const std::uint64_t size = se.size_of(pfn);
  std::unique_ptr<SeChannel> ch(new SeChannel(std::move(se), pfn, {}));
  ch->size_ = size;
  return ch;
}

std::unique_ptr<SeChannel> SeChannel::open_write(wire::Network& net, wire::Address self, wire::Address se_addr,
                                                 std::string token, std::optional<Guid> guid,
                                                 std::uint64_t size_hint) {
  storage::SeClient se(net, std::move(self), std::move(se_addr), std::move(token));
  auto alloc = se.allocate(size_hint, guid);
  return std::unique_ptr<SeChannel>(new SeChannel(std::move(se), alloc.pfn, alloc.token));
}

std::string SeChannel::read(std::uint64_t offset, std::uint64_t length) {
  if (!upload_.empty()) fail(Errc::BadHandle, "channel is open for writing");
  return se_.fetch(pfn_, offset, length);
}

void SeChannel::write(std::uint64_t offset, std::string_view data) {
  if (upload_.empty()) fail(Errc::BadHandle, "channel is open for reading");
  se_.append(pfn_, upload_, offset, std::string(data));
  size_ = offset + data.size();
}

void SeChannel::sync() {
  if (!upload_.empty()) se_.sync(pfn_, upload_);
}

CommitResult SeChannel::close() {
  closed_ = true;
  if (upload_.empty()) return {pfn_, size_};
  return {pfn_, se_.commit(pfn_, upload_, size_)};
}

void SeChannel::abort() noexcept {
  if (closed_ || upload_.empty()) return;
  closed_ = true;
  try {
    se_.abort(pfn_, upload_);
  } catch (...) {
  }
}

std::unique_ptr<AiodChannel> AiodChannel::open(wire::Network& net, wire::Address self, std::string token,
                                               AiodOpen request) {
  std::unique_ptr<AiodChannel> ch(new AiodChannel(net, std::move(self), std::move(token)));
  AccessTicket ticket = request.ticket;
  if (request.hop >= ticket.route.size()) fail(Errc::InvalidArgument, "hop beyond route");
  std::set<wire::Address> visited;
  wire::Address addr = ticket.route[request.hop];
  while (true) {
    visited.insert(addr);
    json args = {{"ticket", ticket.to_json()},
                 {"mode", to_string(request.mode)},
                 {"access", to_string(request.access)},
                 {"size_hint", request.size_hint},
                 {"hop", request.hop}};
    try {
      auto v = wire::rpc(net, ch->self_, addr, "OPEN", std::move(args), ch->token_).value;
      ch->server_ = addr;
      ch->session_ = v.at("session").get<std::string>();
      ch->size_ = v.at("size").get<std::uint64_t>();
      ch->page_size_ = v.at("page_size").get<std::uint64_t>();
      ch->pfn_ = Pfn::parse(v.at("pfn").get<std::string>());
      break;
    } catch (const Error& e) {
      if (e.code() != Errc::Redirect) throw;
      const wire::Address next = e.redirect_address();
      if (ch->redirects_ >= request.max_redirects) fail(Errc::Unreachable, "too many redirects opening " + ticket.lfn);
      if (next.empty() || visited.count(next) > 0) fail(Errc::Unreachable, "redirect loop at " + next);
      ++ch->redirects_;
      ticket.route = ticket.route.with_hop(request.hop, next);
      addr = next;
    }
  }
  ch->route_ = ticket.route;
  ch->encryption_ = ticket.encryption;
  return ch;
}

wire::Reply AiodChannel::call(std::string_view op, json args, std::string data) {
  args["session"] = session_;
  return wire::rpc(net_, self_, server_, op, std::move(args), token_, std::move(data));
}

std::string AiodChannel::read(std::uint64_t offset, std::uint64_t length) {
  auto r = call("READ", {{"offset", offset}, {"length", length}});
  return open_page(encryption_, std::move(r.data));
}

void AiodChannel::write(std::uint64_t offset, std::string_view data) {
  call("WRITE", {{"offset", offset}}, seal_page(encryption_, std::string(data)));
  size_ = offset + data.size();
}

void AiodChannel::sync() { call("SYNC", json::object()); }

CommitResult AiodChannel::close() {
  closed_ = true;
  auto v = call("CLOSE", json::object()).value;
  if (v.is_null()) return {pfn_, size_};
  return {Pfn::parse(v.at("pfn").get<std::string>()), v.at("size").get<std::uint64_t>()};
}

void AiodChannel::abort() noexcept {
  if (closed_) return;
  closed_ = true;
  try {
    call("ABORT", json::object());
  } catch (...) {
  }
}

std::vector<PageRange> AiodChannel::preload(const std::vector<PageRange>& ranges) {
  json plan = json::array();
  for (const auto& r : ranges) plan.push_back({r.offset, r.length});
  auto v = call("PRELOAD", {{"ranges", plan}}).value;
  std::vector<PageRange> failed;
  for (const auto& r : v.at("failed")) failed.push_back({r.at(0).get<std::uint64_t>(), r.at(1).get<std::uint64_t>()});
  return failed;
}

}  // namespace gridfs::aiod
