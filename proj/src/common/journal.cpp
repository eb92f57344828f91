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

#include "gridfs/common/journal.hpp"

#include <string>

#include "gridfs/common/error.hpp"

namespace gridfs {
namespace {

std::vector<json> read_lines(const std::filesystem::path& path) {
  std::vector<json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) break;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

Journal::Journal(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  if (auto snap = read_snapshot()) last_seq_ = snap->seq;
  for (const auto& r : read_lines(path_)) last_seq_ = std::max(last_seq_, r.value("seq", std::uint64_t{0}));
  out_.open(path_, std::ios::app);
  if (!out_) fail(Errc::BackendFailure, "cannot open journal " + path_.string());
}

std::filesystem::path Journal::snapshot_path() const {
  auto p = path_;
  p += ".snapshot";
  return p;
}

std::vector<json> Journal::records_after(std::uint64_t after) const {
  std::vector<json> out;
  for (auto& r : read_lines(path_)) {
    if (r.value("seq", std::uint64_t{0}) > after) out.push_back(std::move(r));
  }
  return out;
}

std::uint64_t Journal::append(json record) {
  record["seq"] = ++last_seq_;
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_) fail(Errc::BackendFailure, "journal write failed: " + path_.string());
  return last_seq_;
}

void Journal::write_snapshot(const std::vector<json>& lines) {
  auto tmp = snapshot_path();
  tmp += ".tmp";
  {
    std::ofstream snap(tmp, std::ios::trunc);
    snap << json{{"kind", "header"}, {"seq", last_seq_}}.dump() << '\n';
    for (const auto& l : lines) snap << l.dump() << '\n';
    snap.flush();
    if (!snap) fail(Errc::BackendFailure, "snapshot write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, snapshot_path());
  out_.close();
  out_.open(path_, std::ios::trunc);
  if (!out_) fail(Errc::BackendFailure, "cannot reopen journal " + path_.string());
}

std::optional<Journal::Snapshot> Journal::read_snapshot() const {
  if (!std::filesystem::exists(snapshot_path())) return std::nullopt;
  auto lines = read_lines(snapshot_path());
  if (lines.empty() || lines.front().value("kind", std::string()) != "header") {
    fail(Errc::BackendFailure, "snapshot without header: " + snapshot_path().string());
  }
  Snapshot snap;
  snap.seq = lines.front().at("seq").get<std::uint64_t>();
  snap.lines.assign(std::make_move_iterator(lines.begin() + 1), std::make_move_iterator(lines.end()));
  return snap;
}

}  // namespace gridfs
