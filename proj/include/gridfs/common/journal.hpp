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
#include <fstream>
#include <optional>
#include <vector>

#include <json.hpp>

namespace gridfs {

using json = nlohmann::json;

// Append-only operation log, one JSON object per line, each carrying a
// monotonically increasing "seq". Paired with a snapshot file holding the
// full state as of some seq; records at or below that seq are obsolete.
class Journal {
 public:
  explicit Journal(std::filesystem::path path);

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path snapshot_path() const;

  // Records with seq greater than `after`, in file order. A torn final line
  // (crash mid-append) is ignored.
  std::vector<json> records_after(std::uint64_t after) const;

  // Stamps record["seq"] and appends it durably; returns the seq.
  std::uint64_t append(json record);

  // Atomically replaces the snapshot with `lines` as of the last appended
  // seq, then truncates the log.
  void write_snapshot(const std::vector<json>& lines);

  struct Snapshot {
    std::uint64_t seq = 0;
    std::vector<json> lines;
  };
  std::optional<Snapshot> read_snapshot() const;

  std::uint64_t last_seq() const noexcept { return last_seq_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t last_seq_ = 0;
};

}  // namespace gridfs
