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

#include "gridfs/storage/service.hpp"

#include "gridfs/common/error.hpp"

namespace gridfs::storage {
namespace {

using wire::make_ok;
using wire::Message;

Pfn pfn_arg(const json& a) { return Pfn::parse(a.at("pfn").get<std::string>()); }
std::string upload_arg(const json& a) { return a.at("upload").get<std::string>(); }

}  // namespace

void SeDirectory::add(SeInfo info) {
  for (const auto& s : ses_) {
    if (s.name == info.name) fail(Errc::InvalidArgument, "duplicate storage element " + info.name);
  }
  ses_.push_back(std::move(info));
}

const SeInfo& SeDirectory::by_name(std::string_view name) const {
  for (const auto& s : ses_) {
    if (s.name == name) return s;
  }
  fail(Errc::UnknownSe, "unknown storage element '" + std::string(name) + "'");
}

const SeInfo* SeDirectory::by_endpoint(std::string_view endpoint) const {
  for (const auto& s : ses_) {
    if (s.address == endpoint) return &s;
  }
  return nullptr;
}

SeDirectory SeDirectory::from_json(const json& j) {
  SeDirectory d;
  for (const auto& s : j) {
    d.add({s.at("name").get<std::string>(), s.at("address").get<std::string>(), s.value("site", std::string())});
  }
  return d;
}

json SeDirectory::to_json() const {
  json out = json::array();
  for (const auto& s : ses_) out.push_back({{"name", s.name}, {"address", s.address}, {"site", s.site}});
  return out;
}

SeService::SeService(StorageElement& se, const catalogue::AuthTable* auth) : se_(se), auth_(auth) {
  auto& d = dispatch_;
  auto* s = &se_;
  d.on("allocate", [s](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    std::optional<Guid> guid;
    if (a.contains("guid")) guid = Guid::parse(a["guid"].get<std::string>());
    auto alloc = s->allocate_pfn(a.value("size_hint", std::uint64_t{0}), guid);
    return make_ok({{"pfn", alloc.pfn.str()}, {"volume", alloc.volume_id}, {"upload", alloc.token}});
  });
  d.on("append", [s](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    s->append(pfn_arg(a), upload_arg(a), a.at("offset").get<std::uint64_t>(), m.data);
    return make_ok(m.data.size());
  });
  d.on("sync", [s](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    s->sync(pfn_arg(a), upload_arg(a));
    return make_ok(nullptr);
  });
  d.on("commit", [s](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    std::optional<std::uint64_t> expected;
    if (a.contains("size")) expected = a["size"].get<std::uint64_t>();
    return make_ok(s->commit(pfn_arg(a), upload_arg(a), expected));
  });
  d.on("abort", [s](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    s->abort(pfn_arg(a), upload_arg(a));
    return make_ok(nullptr);
  });
  d.on("store", [s](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    return make_ok(s->store_file(pfn_arg(a), upload_arg(a), m.data));
  });
  d.on("fetch", [s](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    auto data = s->fetch_file(pfn_arg(a), a.at("offset").get<std::uint64_t>(), a.at("length").get<std::uint64_t>());
    auto n = data.size();
    return make_ok(n, std::move(data));
  });
  d.on("sizeof", [s](const auto&, const Message& m) { return make_ok(s->size_of(pfn_arg(wire::args_of(m)))); });
  d.on("lslist", [s](const auto&, const Message&) {
    json out = json::array();
    for (const auto& f : s->lslist()) out.push_back({{"path", f.path}, {"bytes", f.bytes}});
    return make_ok(std::move(out));
  });
  d.on("rm", [s](const auto&, const Message& m) {
    s->rm(pfn_arg(wire::args_of(m)));
    return make_ok(nullptr);
  });
  d.on("expire", [s](const auto&, const Message& m) {
    const auto& a = wire::args_of(m);
    return make_ok(a.contains("now") ? s->expire_files(a["now"].get<std::int64_t>()) : s->expire_files());
  });
  d.on("resync", [s](const auto&, const Message&) { return make_ok(s->resync().to_json()); });
  d.on("volumes", [s](const auto&, const Message&) {
    json out = json::array();
    for (const auto& v : s->volumes()) {
      json j = v.spec.to_json();
      j["used"] = v.used;
      j["reserved"] = v.reserved;
      out.push_back(std::move(j));
    }
    return make_ok(std::move(out));
  });
  d.on("info", [s](const auto&, const Message&) {
    return make_ok({{"se_name", s->config().se_name},
                    {"site", s->config().site},
                    {"plugin", s->config().plugin},
                    {"listen", s->config().listen}});
  });
}

wire::Message SeService::handle(const wire::Address& caller, const wire::Message& request) {
  try {
    if (auth_ != nullptr && !auth_->empty()) auth_->lookup(wire::auth_of(request));
    if (fault_hook_) {
      if (auto code = fault_hook_(wire::op_of(request))) return wire::make_error(*code, "injected fault");
    }
  } catch (const Error& e) {
    return wire::make_error(e);
  }
  return dispatch_.handle(caller, request);
}

SeClient::SeClient(wire::Network& net, wire::Address self, wire::Address se, std::string token)
    : net_(net), self_(std::move(self)), se_(std::move(se)), token_(std::move(token)) {}

wire::Reply SeClient::call(std::string_view op, json args, std::string data) {
  return wire::rpc(net_, self_, se_, op, std::move(args), token_, std::move(data));
}

Allocation SeClient::allocate(std::uint64_t size_hint, std::optional<Guid> guid) {
  json args = {{"size_hint", size_hint}};
  if (guid) args["guid"] = guid->to_string();
  auto v = call("allocate", std::move(args)).value;
  return {Pfn::parse(v.at("pfn").get<std::string>()), v.at("volume").get<std::string>(),
          v.at("upload").get<std::string>()};
}

void SeClient::append(const Pfn& pfn, const std::string& upload, std::uint64_t offset, std::string data) {
  call("append", {{"pfn", pfn.str()}, {"upload", upload}, {"offset", offset}}, std::move(data));
}

void SeClient::sync(const Pfn& pfn, const std::string& upload) { call("sync", {{"pfn", pfn.str()}, {"upload", upload}}); }

std::uint64_t SeClient::commit(const Pfn& pfn, const std::string& upload, std::optional<std::uint64_t> expected_size) {
  json args = {{"pfn", pfn.str()}, {"upload", upload}};
  if (expected_size) args["size"] = *expected_size;
  return call("commit", std::move(args)).value.get<std::uint64_t>();
}

void SeClient::abort(const Pfn& pfn, const std::string& upload) { call("abort", {{"pfn", pfn.str()}, {"upload", upload}}); }

std::uint64_t SeClient::store(const Pfn& pfn, const std::string& upload, std::string data) {
  return call("store", {{"pfn", pfn.str()}, {"upload", upload}}, std::move(data)).value.get<std::uint64_t>();
}

std::string SeClient::fetch(const Pfn& pfn, std::uint64_t offset, std::uint64_t length) {
  return call("fetch", {{"pfn", pfn.str()}, {"offset", offset}, {"length", length}}).data;
}

std::uint64_t SeClient::size_of(const Pfn& pfn) { return call("sizeof", {{"pfn", pfn.str()}}).value.get<std::uint64_t>(); }

std::vector<StoredFile> SeClient::lslist() {
  std::vector<StoredFile> out;
  for (const auto& f : call("lslist", json::object()).value) {
    out.push_back({f.at("path").get<std::string>(), f.at("bytes").get<std::uint64_t>()});
  }
  return out;
}

void SeClient::rm(const Pfn& pfn) { call("rm", {{"pfn", pfn.str()}}); }

std::vector<std::string> SeClient::expire(std::optional<std::int64_t> now_s) {
  json args = json::object();
  if (now_s) args["now"] = *now_s;
  return call("expire", std::move(args)).value.get<std::vector<std::string>>();
}

ResyncReport SeClient::resync() {
  auto v = call("resync", json::object()).value;
  return {v.at("added").get<std::uint64_t>(), v.at("removed").get<std::uint64_t>(),
          v.at("size_corrected").get<std::uint64_t>()};
}

json SeClient::volumes() { return call("volumes", json::object()).value; }

json SeClient::info() { return call("info", json::object()).value; }

}  // namespace gridfs::storage
