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

#include "gridfs/catalogue/types.hpp"

#include <algorithm>

#include "gridfs/common/error.hpp"

namespace gridfs::catalogue {
namespace {

constexpr std::string_view kGridScheme = "grid://";

void push_segment(std::vector<std::string>& out, std::string_view seg, std::string_view whole) {
  if (seg.empty() || seg == ".") return;
  if (seg == "..") {
    if (out.empty()) fail(Errc::InvalidArgument, "path escapes root: " + std::string(whole));
    out.pop_back();
    return;
  }
  if (seg.size() > LfnPath::kMaxSegment) fail(Errc::InvalidArgument, "path segment longer than 255 bytes");
  if (seg.find('\0') != std::string_view::npos) fail(Errc::InvalidArgument, "NUL in path");
  if (seg.find('@') != std::string_view::npos) {
    fail(Errc::InvalidArgument, "'@' is not allowed in logical file names: " + std::string(whole));
  }
  out.emplace_back(seg);
}

void split_into(std::vector<std::string>& out, std::string_view text) {
  std::string_view rest = text;
  while (!rest.empty()) {
    auto slash = rest.find('/');
    push_segment(out, rest.substr(0, slash), text);
    if (slash == std::string_view::npos) break;
    rest.remove_prefix(slash + 1);
  }
}

bool valid_protocol(std::string_view p) {
  if (p.empty()) return false;
  return std::all_of(p.begin(), p.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.';
  });
}

}  // namespace

LfnPath LfnPath::parse(std::string_view text) {
  if (text.substr(0, kGridScheme.size()) == kGridScheme) {
    text.remove_prefix(kGridScheme.size());
    LfnPath p;
    split_into(p.segments_, text);
    return p;
  }
  if (text.empty() || text.front() != '/') {
    fail(Errc::InvalidArgument, "logical file name must be absolute: '" + std::string(text) + "'");
  }
  LfnPath p;
  split_into(p.segments_, text);
  return p;
}

LfnPath LfnPath::resolve(const LfnPath& cwd, std::string_view text) {
  if (text.empty()) return cwd;
  if (text.front() == '/' || text.substr(0, kGridScheme.size()) == kGridScheme) return parse(text);
  LfnPath p = cwd;
  split_into(p.segments_, text);
  return p;
}

std::string LfnPath::str() const {
  if (segments_.empty()) return "/";
  std::string out;
  for (const auto& s : segments_) {
    out.push_back('/');
    out += s;
  }
  return out;
}

LfnPath LfnPath::parent() const {
  LfnPath p = *this;
  if (!p.segments_.empty()) p.segments_.pop_back();
  return p;
}

const std::string& LfnPath::basename() const {
  static const std::string root;
  return segments_.empty() ? root : segments_.back();
}

LfnPath LfnPath::child(std::string_view name) const {
  LfnPath p = *this;
  push_segment(p.segments_, name, name);
  if (p.segments_.size() != segments_.size() + 1) fail(Errc::InvalidArgument, "bad child name '" + std::string(name) + "'");
  return p;
}

bool LfnPath::is_prefix_of(const LfnPath& other) const noexcept {
  if (segments_.size() > other.segments_.size()) return false;
  return std::equal(segments_.begin(), segments_.end(), other.segments_.begin());
}

Pfn Pfn::parse(std::string_view text) {
  auto bad = [&](const char* why) { fail(Errc::InvalidArgument, std::string(why) + ": '" + std::string(text) + "'"); };
  auto scheme_end = text.find("://");
  if (scheme_end == std::string_view::npos) bad("PFN without scheme");
  Pfn pfn;
  pfn.protocol = std::string(text.substr(0, scheme_end));
  if (!valid_protocol(pfn.protocol)) bad("bad PFN protocol");
  std::string_view rest = text.substr(scheme_end + 3);
  auto slash = rest.find('/');
  if (slash == std::string_view::npos) bad("PFN without direntry");
  std::string_view hostport = rest.substr(0, slash);
  auto colon = hostport.rfind(':');
  if (colon == std::string_view::npos || colon == 0) bad("PFN without host:port");
  pfn.host = std::string(hostport.substr(0, colon));
  std::string_view port = hostport.substr(colon + 1);
  if (port.empty() || port.size() > 5) bad("bad PFN port");
  unsigned long value = 0;
  for (char c : port) {
    if (c < '0' || c > '9') bad("bad PFN port");
    value = value * 10 + static_cast<unsigned long>(c - '0');
  }
  if (value < 1 || value > 65535) bad("PFN port out of range");
  pfn.port = static_cast<std::uint16_t>(value);
  pfn.direntry = std::string(rest.substr(slash + 1));
  return pfn;
}

std::string Pfn::str() const { return protocol + "://" + host + ":" + std::to_string(port) + "/" + direntry; }

bool Principal::in_group(std::string_view group) const {
  return std::find(groups.begin(), groups.end(), group) != groups.end();
}

json Principal::to_json() const { return {{"user", user}, {"groups", groups}}; }

Principal Principal::from_json(const json& j) {
  Principal p;
  p.user = j.at("user").get<std::string>();
  p.groups = j.value("groups", std::vector<std::string>{});
  if (p.user.empty()) fail(Errc::InvalidArgument, "principal without user");
  return p;
}

PermissionBits PermissionBits::from_octal(std::string_view text) {
  if (text.empty() || text.size() > 4) fail(Errc::InvalidArgument, "bad mode '" + std::string(text) + "'");
  unsigned mode = 0;
  for (char c : text) {
    if (c < '0' || c > '7') fail(Errc::InvalidArgument, "bad mode '" + std::string(text) + "'");
    mode = mode * 8 + static_cast<unsigned>(c - '0');
  }
  if (mode > 0777) fail(Errc::InvalidArgument, "mode has bits beyond rwxrwxrwx");
  return PermissionBits(mode);
}

std::string PermissionBits::to_octal() const {
  std::string out(3, '0');
  out[0] = static_cast<char>('0' + owner_bits());
  out[1] = static_cast<char>('0' + group_bits());
  out[2] = static_cast<char>('0' + other_bits());
  return out;
}

std::string PermissionBits::to_symbolic() const {
  std::string out;
  for (unsigned bits : {owner_bits(), group_bits(), other_bits()}) {
    out.push_back(bits & kRead ? 'r' : '-');
    out.push_back(bits & kWrite ? 'w' : '-');
    out.push_back(bits & kExecute ? 'x' : '-');
  }
  return out;
}

bool permits(const Principal& who, std::string_view owner, std::string_view group, PermissionBits perms,
             unsigned required) {
  unsigned granted = 0;
  if (who.user == owner) {
    granted = perms.owner_bits();
  } else if (who.in_group(group)) {
    granted = perms.group_bits();
  } else {
    granted = perms.other_bits();
  }
  return (granted & required) == required;
}

}  // namespace gridfs::catalogue
