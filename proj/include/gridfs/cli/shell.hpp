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

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridfs/access/client.hpp"
#include "gridfs/transfer/broker.hpp"

namespace gridfs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

// 10 + position of the code in all_error_codes().
int exit_code_for(Errc code) noexcept;
std::vector<std::pair<int, std::string>> exit_code_table();

// A command argument naming either a local file or an LFN with an optional
// @SE suffix.
struct Target {
  bool local = false;
  std::string path;  // local path, or absolute LFN text
  std::optional<std::string> se;

  std::string str() const;
};

// "local:x" is local; "grid://x" and anything else is an LFN, relative ones
// taken from `cwd`.
Target parse_target(std::string_view text, const catalogue::LfnPath& cwd);

// Client settings plus the shell's own keys: "broker" (address) and
// "dir_cache_ttl_s".
struct ShellConfig {
  access::ClientConfig client;
  wire::Address broker;
  double dir_cache_ttl_s = 5.0;

  static ShellConfig from_json(const json& j);
};

// Reads the file named by `path`, or by GRIDFS_CONFIG when absent, then
// applies GRIDFS_TOKEN.
ShellConfig load_config(const std::optional<std::filesystem::path>& path);

// Interactive grid shell. Each command is a composition of catalogue,
// access and transfer operations.
class Shell {
 public:
  using Clock = std::function<double()>;  // seconds

  Shell(access::GridClient& client, std::optional<transfer::TransferClient> broker, Clock clock,
        double dir_cache_ttl_s = 5.0);

  // Runs one command; returns its exit code.
  int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
  int run_line(const std::string& line, std::ostream& out, std::ostream& err);
  // Reads commands until end of input or "exit". Returns the last exit code.
  int repl(std::istream& in, std::ostream& out, std::ostream& err, bool prompt = false);

  const catalogue::LfnPath& cwd() const noexcept { return cwd_; }
  std::uint64_t dir_cache_hits() const noexcept { return cache_hits_; }

  static std::string usage();

 private:
  using Args = std::vector<std::string>;

  void ls(const Args& a, std::ostream& out);
  void mkdir(const Args& a);
  void cp(const Args& a, std::ostream& out);
  void rm(const Args& a, std::ostream& err);
  void mv(const Args& a);
  void whereis(const Args& a, std::ostream& out);
  void cat(const Args& a, std::ostream& out);
  void meta(const Args& a, std::ostream& out);
  void chmod(const Args& a);
  void chown(const Args& a);
  void aioget(const Args& a, std::ostream& out);
  void aioput(const Args& a, std::ostream& out);
  void transfer(const Args& a, std::ostream& out);
  void cd(const Args& a);

  catalogue::LfnPath lfn(const std::string& text) const;
  const std::vector<catalogue::DirEntry>& listing(const catalogue::LfnPath& dir);
  catalogue::Stat stat(const catalogue::LfnPath& path);
  void invalidate() { dir_cache_.clear(); }
  transfer::TransferClient& broker();
  void copy_grid_to_grid(const Target& src, const Target& dst, std::ostream& out);

  struct Cached {
    double at = 0;
    std::vector<catalogue::DirEntry> entries;
  };

  access::GridClient& client_;
  std::optional<transfer::TransferClient> broker_;
  Clock clock_;
  double ttl_s_;
  catalogue::LfnPath cwd_;
  std::map<catalogue::LfnPath, Cached> dir_cache_;
  std::uint64_t cache_hits_ = 0;
};

// "drwxr-xr-x" style mode column.
std::string mode_string(bool is_dir, catalogue::PermissionBits perms);
// One `ls -l` line.
std::string long_line(const catalogue::DirEntry& e);

}  // namespace gridfs::cli
