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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gridfs/wire/network.hpp"

namespace gridfs::aiod {

using json = nlohmann::json;

enum class AccessKind { kSequential, kRandom };

std::string_view to_string(AccessKind kind) noexcept;
AccessKind access_kind_from_string(std::string_view text);

inline constexpr std::uint64_t kMinPage = 4ull << 10;
inline constexpr std::uint64_t kMaxPage = 4ull << 20;
inline constexpr std::uint64_t kRandomPage = 16ull << 10;

// Sequential: smallest power of two >= file_size / 64, clamped to
// [4 KiB, 4 MiB]. Random: 16 KiB.
std::uint64_t page_size_for(std::uint64_t file_size, AccessKind kind) noexcept;

struct PageRange {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  friend bool operator==(const PageRange&, const PageRange&) = default;
};

// Aligned pages covering [offset, offset + length) of a file. The last page
// is cut at end of file.
std::vector<PageRange> covering_pages(std::uint64_t offset, std::uint64_t length, std::uint64_t file_size,
                                      std::uint64_t page_size);

// Token bucket. rate 0 means unlimited.
class TokenBucket {
 public:
  TokenBucket() = default;
  TokenBucket(std::uint64_t rate_bytes_per_s, std::uint64_t capacity_bytes, std::int64_t now_us);

  // Takes `bytes` tokens and returns how long the sender must wait before
  // the bytes may leave. Tokens may go negative; the debt is the delay.
  std::int64_t take(std::uint64_t bytes, std::int64_t now_us);

  std::uint64_t rate() const noexcept { return rate_; }
  std::uint64_t capacity() const noexcept { return capacity_; }

 private:
  std::uint64_t rate_ = 0;
  std::uint64_t capacity_ = 0;
  double tokens_ = 0;
  std::int64_t last_us_ = 0;
};

struct LoadReport {
  wire::Address server;
  std::uint64_t open_connections = 0;
  double bytes_per_second_recent = 0;
  std::int64_t timestamp_us = 0;

  json to_json() const;
  static LoadReport from_json(const json& j);
};

// open_connections + bytes_per_second_recent / rate_limit (rate term dropped
// when rate_limit is 0).
double load_score(const LoadReport& r, std::uint64_t rate_limit) noexcept;

// Lowest score among reports no older than staleness_us; ties go to the
// lexicographically smallest address. Throws NoFreshReports.
wire::Address pick_io_slave(const std::vector<LoadReport>& reports, std::int64_t now_us, std::int64_t staleness_us,
                            std::uint64_t rate_limit);

}  // namespace gridfs::aiod
