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
#include <optional>
#include <string>
#include <vector>

#include "gridfs/catalogue/service.hpp"
#include "gridfs/common/journal.hpp"
#include "gridfs/storage/service.hpp"

namespace gridfs::transfer {

enum class TransferKind { kReplicate, kMove };
enum class TransferState { kQueued, kRunning, kDone, kFailed };

std::string_view to_string(TransferKind kind) noexcept;
std::string_view to_string(TransferState state) noexcept;
TransferKind transfer_kind_from_string(std::string_view text);
TransferState transfer_state_from_string(std::string_view text);

struct TransferRequest {
  std::uint64_t id = 0;
  std::string lfn;
  std::string src_se = "any";
  std::string dst_se;
  TransferKind kind = TransferKind::kReplicate;
  TransferState state = TransferState::kQueued;
  std::uint32_t attempts = 0;
  std::optional<std::string> last_error;
  std::string owner;

  json to_json() const;
  static TransferRequest from_json(const json& j);
};

// Persistent request store. Transitions: queued -> running -> done | failed,
// failed -> queued.
class TransferQueue {
 public:
  explicit TransferQueue(std::optional<std::filesystem::path> journal = std::nullopt);

  std::uint64_t enqueue(const std::string& owner, const std::string& lfn, const std::string& src_se,
                        const std::string& dst_se, TransferKind kind);
  TransferRequest query(std::uint64_t id) const;  // throws NotFound
  std::vector<TransferRequest> list() const;

  // Up to n queued requests in id order, now running.
  std::vector<TransferRequest> start(std::size_t n);
  void finish(std::uint64_t id, bool ok, std::optional<std::string> error);
  // Failed requests with attempts below the limit go back to queued.
  std::vector<std::uint64_t> requeue_failed(std::uint32_t retry_limit);

 private:
  void set_state(TransferRequest& r, TransferState to, std::optional<std::string> error);
  void log(json record);
  void apply(const json& record);

  mutable std::mutex mu_;
  std::map<std::uint64_t, TransferRequest> requests_;
  std::uint64_t next_id_ = 1;
  std::unique_ptr<Journal> journal_;
  bool replaying_ = false;
  std::uint64_t since_snapshot_ = 0;
};

struct BrokerConfig {
  wire::Address listen = "broker";
  wire::Address catalogue_addr;
  std::string token;  // the broker's own catalogue / SE credential
  std::size_t max_concurrent = 2;
  std::uint32_t retry_limit = 3;
  std::optional<std::filesystem::path> journal;
  storage::SeDirectory ses;

  // Keys: listen, catalogue_addr, token, max_concurrent, retry_limit,
  // journal, ses.
  static BrokerConfig from_json(const json& j);
};

// Executes queued requests: copy from a source replica to the destination SE
// (allocate, stream, commit), then add_replica; moves also drop the source.
class TransferBroker {
 public:
  TransferBroker(wire::Network& net, BrokerConfig config);

  // Checks run with the requester's token.
  std::uint64_t enqueue(const std::string& requester_token, const std::string& lfn, const std::string& dst_se,
                        TransferKind kind, const std::string& src_se = "any");
  TransferRequest query(std::uint64_t id) const { return queue_.query(id); }
  std::vector<TransferRequest> list() const { return queue_.list(); }
  std::vector<std::uint64_t> step();
  // Catalogue identity behind a token; throws Unauthenticated.
  catalogue::Principal authenticate(const std::string& token);

  const BrokerConfig& config() const noexcept { return config_; }
  TransferQueue& queue() noexcept { return queue_; }

 private:
  void execute(const TransferRequest& r);

  wire::Network& net_;
  BrokerConfig config_;
  TransferQueue queue_;
  catalogue::CatalogueClient catalogue_;
};

// Ops: enqueue {lfn, dst_se, kind, src_se?}, query {id}, list, step.
class TransferService : public wire::Service {
 public:
  explicit TransferService(TransferBroker& broker);
  wire::Message handle(const wire::Address& caller, const wire::Message& request) override;

 private:
  TransferBroker& broker_;
  wire::Dispatcher dispatch_;
};

class TransferClient {
 public:
  TransferClient(wire::Network& net, wire::Address self, wire::Address broker, std::string token);

  std::uint64_t enqueue(const std::string& lfn, const std::string& dst_se, TransferKind kind,
                        const std::string& src_se = "any");
  TransferRequest query(std::uint64_t id);
  std::vector<TransferRequest> list();
  std::vector<std::uint64_t> step();

 private:
  json call(std::string_view op, json args);

  wire::Network& net_;
  wire::Address self_;
  wire::Address broker_;
  std::string token_;
};

}  // namespace gridfs::transfer
