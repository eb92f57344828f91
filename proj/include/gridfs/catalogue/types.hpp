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

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace gridfs::catalogue {

using json = nlohmann::json;

// Absolute logical file name. Canonical text is "/seg/seg"; the root is "/".
class LfnPath {
 public:
  static constexpr std::size_t kMaxSegment = 255;

  LfnPath() = default;

  // Accepts an absolute path, optionally prefixed with "grid://". "." and
  // ".." are resolved lexically; repeated slashes collapse. Segments may not
  // contain '@' (reserved for the <lfn>@<SE> addressing syntax) or NUL.
  static LfnPath parse(std::string_view text);
  // Like parse, but relative text is interpreted against `cwd`.
  static LfnPath resolve(const LfnPath& cwd, std::string_view text);

  const std::vector<std::string>& segments() const noexcept { return segments_; }
  std::string str() const;
  bool is_root() const noexcept { return segments_.empty(); }
  LfnPath parent() const;
  const std::string& basename() const;
  LfnPath child(std::string_view name) const;
  bool is_prefix_of(const LfnPath& other) const noexcept;

  friend auto operator<=>(const LfnPath&, const LfnPath&) = default;

 private:
  std::vector<std::string> segments_;
};

// Physical file name: <protocol>://<host>:<port>/<direntry>.
struct Pfn {
  std::string protocol;
  std::string host;
  std::uint16_t port = 0;
  std::string direntry;

  static Pfn parse(std::string_view text);
  std::string str() const;
  // "host:port" of the service holding this copy.
  std::string endpoint() const { return host + ":" + std::to_string(port); }

  friend auto operator<=>(const Pfn&, const Pfn&) = default;
};

struct Principal {
  std::string user;
  std::vector<std::string> groups;

  // Group given to objects this principal creates.
  std::string primary_group() const { return groups.empty() ? user : groups.front(); }
  bool in_group(std::string_view group) const;

  json to_json() const;
  static Principal from_json(const json& j);
};

enum Access : unsigned { kExecute = 1, kWrite = 2, kRead = 4 };

// 9-bit unix mode, owner/group/other.
class PermissionBits {
 public:
  constexpr PermissionBits() = default;
  constexpr explicit PermissionBits(unsigned mode) : mode_(mode & 0777u) {}

  static PermissionBits from_octal(std::string_view text);
  std::string to_octal() const;
  // "rwxr-x---" form used by ls -l.
  std::string to_symbolic() const;

  constexpr unsigned mode() const noexcept { return mode_; }
  constexpr unsigned owner_bits() const noexcept { return (mode_ >> 6) & 7u; }
  constexpr unsigned group_bits() const noexcept { return (mode_ >> 3) & 7u; }
  constexpr unsigned other_bits() const noexcept { return mode_ & 7u; }

  friend constexpr bool operator==(PermissionBits, PermissionBits) = default;

 private:
  unsigned mode_ = 0;
};

// Unix evaluation: an owner match consults only the owner bits, otherwise a
// group match consults only the group bits, otherwise the other bits.
bool permits(const Principal& who, std::string_view owner, std::string_view group, PermissionBits perms,
             unsigned required);

}  // namespace gridfs::catalogue
