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
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "gridfs/aiod/policy.hpp"
#include "gridfs/aiod/ticket.hpp"
#include "gridfs/storage/service.hpp"

namespace gridfs::aiod {

struct CommitResult {
  catalogue::Pfn pfn;
  std::uint64_t size = 0;
};

// An open data path to one file, either straight to a storage element or
// through a chain of aiod hops.
class DataChannel {
 public:
  virtual ~DataChannel() = default;

  virtual std::string read(std::uint64_t offset, std::uint64_t length) = 0;
  virtual void write(std::uint64_t offset, std::string_view data) = 0;
  virtual void sync() = 0;
  // Write channels commit and report the stored PFN and size.
  virtual CommitResult close() = 0;
  // Best effort; never throws.
  virtual void abort() noexcept = 0;

  virtual const catalogue::Pfn& pfn() const = 0;
  // Address of the first server on the path.
  virtual const wire::Address& endpoint() const = 0;
};

class SeChannel : public DataChannel {
 public:
  // Confirms the SE holds the PFN (one sizeof round trip).
  static std::unique_ptr<SeChannel> open_read(wire::Network& net, wire::Address self, const catalogue::Pfn& pfn,
                                              std::string token);
  static std::unique_ptr<SeChannel> open_write(wire::Network& net, wire::Address self, wire::Address se,
                                               std::string token, std::optional<Guid> guid,
                                               std::uint64_t size_hint);

  std::string read(std::uint64_t offset, std::uint64_t length) override;
  void write(std::uint64_t offset, std::string_view data) override;
  void sync() override;
  CommitResult close() override;
  void abort() noexcept override;
  const catalogue::Pfn& pfn() const override { return pfn_; }
  const wire::Address& endpoint() const override { return se_.address(); }

  std::uint64_t size() const noexcept { return size_; }

 private:
  SeChannel(storage::SeClient se, catalogue::Pfn pfn, std::string upload);

  storage::SeClient se_;
  catalogue::Pfn pfn_;
  std::string upload_;  // empty for reads
  std::uint64_t size_ = 0;
  bool closed_ = false;
};

struct AiodOpen {
  AccessTicket ticket;
  SessionMode mode = SessionMode::kRead;
  AccessKind access = AccessKind::kSequential;
  std::uint64_t size_hint = 0;
  std::size_t hop = 0;  // position of the server being opened in ticket.route
  int max_redirects = 4;
};

// Session on an aiod server. Follows Redirect replies when opening, never
// visiting an address twice.
class AiodChannel : public DataChannel {
 public:
  static std::unique_ptr<AiodChannel> open(wire::Network& net, wire::Address self, std::string token,
                                           AiodOpen request);

  std::string read(std::uint64_t offset, std::uint64_t length) override;
  void write(std::uint64_t offset, std::string_view data) override;
  void sync() override;
  CommitResult close() override;
  void abort() noexcept override;
  const catalogue::Pfn& pfn() const override { return pfn_; }
  const wire::Address& endpoint() const override { return server_; }

  // Asks the server to pull the ranges into its cache. Returns the ranges
  // that failed.
  std::vector<PageRange> preload(const std::vector<PageRange>& ranges);

  std::uint64_t size() const noexcept { return size_; }
  std::uint64_t page_size() const noexcept { return page_size_; }
  const RouteChain& route() const noexcept { return route_; }
  int redirects() const noexcept { return redirects_; }

 private:
  AiodChannel(wire::Network& net, wire::Address self, std::string token) :
      net_(net), self_(std::move(self)), token_(std::move(token)) {}
  wire::Reply call(std::string_view op, json args, std::string data = {});

  wire::Network& net_;
  wire::Address self_;
  std::string token_;
  wire::Address server_;
  std::string session_;
  std::string encryption_;
  RouteChain route_;
  catalogue::Pfn pfn_;
  std::uint64_t size_ = 0;
  std::uint64_t page_size_ = 0;
  int redirects_ = 0;
  bool closed_ = false;
};

}  // namespace gridfs::aiod
