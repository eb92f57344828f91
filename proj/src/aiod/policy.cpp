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

#include "gridfs/aiod/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "gridfs/common/error.hpp"

namespace gridfs::aiod {

std::string_view to_string(AccessKind kind) noexcept {
  return kind == AccessKind::kRandom ? "random" : "sequential";
}

AccessKind access_kind_from_string(std::string_view text) {
  if (text == "sequential") return AccessKind::kSequential;
  if (text == "random") return AccessKind::kRandom;
  fail(Errc::InvalidArgument, "unknown access kind '" + std::string(text) + "'");
}

std::uint64_t page_size_for(std::uint64_t file_size, AccessKind kind) noexcept {
  if (kind == AccessKind::kRandom) return kRandomPage;
  const std::uint64_t want = (file_size + 63) / 64;
  return std::clamp<std::uint64_t>(std::bit_ceil(std::max<std::uint64_t>(want, 1)), kMinPage, kMaxPage);
}

std::vector<PageRange> covering_pages(std::uint64_t offset, std::uint64_t length, std::uint64_t file_size,
                                      std::uint64_t page_size) {
  std::vector<PageRange> out;
  if (length == 0 || offset >= file_size) return out;
  const std::uint64_t end = std::min(file_size, offset + length);
  for (std::uint64_t p = offset / page_size * page_size; p < end; p += page_size) {
    out.push_back({p, std::min(page_size, file_size - p)});
  }
  return out;
}

TokenBucket::TokenBucket(std::uint64_t rate_bytes_per_s, std::uint64_t capacity_bytes, std::int64_t now_us)
    : rate_(rate_bytes_per_s),
      capacity_(std::max<std::uint64_t>(capacity_bytes, 1)),
      tokens_(static_cast<double>(capacity_)),
      last_us_(now_us) {}

std::int64_t TokenBucket::take(std::uint64_t bytes, std::int64_t now_us) {
  if (rate_ == 0) return 0;
  if (now_us > last_us_) {
    tokens_ = std::min(static_cast<double>(capacity_),
                       tokens_ + static_cast<double>(now_us - last_us_) * static_cast<double>(rate_) / 1e6);
    last_us_ = now_us;
  }
  tokens_ -= static_cast<double>(bytes);
  if (tokens_ >= 0) return 0;
  return static_cast<std::int64_t>(std::ceil(-tokens_ * 1e6 / static_cast<double>(rate_)));
}

json LoadReport::to_json() const {
  return {{"server", server},
          {"open_connections", open_connections},
          {"bytes_per_second_recent", bytes_per_second_recent},
          {"timestamp", timestamp_us}};
}

LoadReport LoadReport::from_json(const json& j) {
  LoadReport r;
  r.server = j.at("server").get<std::string>();
  r.open_connections = j.at("open_connections").get<std::uint64_t>();
  r.bytes_per_second_recent = j.at("bytes_per_second_recent").get<double>();
  r.timestamp_us = j.at("timestamp").get<std::int64_t>();
  if (r.bytes_per_second_recent < 0) fail(Errc::InvalidArgument, "negative load rate");
  return r;
}

double load_score(const LoadReport& r, std::uint64_t rate_limit) noexcept {
  double score = static_cast<double>(r.open_connections);
  if (rate_limit > 0) score += r.bytes_per_second_recent / static_cast<double>(rate_limit);
  return score;
}

wire::Address pick_io_slave(const std::vector<LoadReport>& reports, std::int64_t now_us, std::int64_t staleness_us,
                            std::uint64_t rate_limit) {
  const LoadReport* best = nullptr;
  double best_score = 0;
  for (const auto& r : reports) {
    if (now_us - r.timestamp_us > staleness_us) continue;
    const double s = load_score(r, rate_limit);
    if (best == nullptr || s < best_score || (s == best_score && r.server < best->server)) {
      best = &r;
      best_score = s;
    }
  }
  if (best == nullptr) fail(Errc::NoFreshReports, "no fresh load reports");
  return best->server;
}

}  // namespace gridfs::aiod
