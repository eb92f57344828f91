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

#include "gridfs/cli/shell.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gridfs/storage/service.hpp"

namespace gridfs::cli {
namespace {

namespace fs = std::filesystem;
using catalogue::DirEntry;
using catalogue::LfnPath;

constexpr std::uint64_t kChunk = 4ull << 20;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void usage_error(const std::string& msg) { throw UsageError(msg); }

std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_word = false;
  char quote = 0;
  for (char c : line) {
    if (quote != 0) {
      if (c == quote) {
        quote = 0;
      } else {
        cur += c;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
      in_word = true;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (in_word) out.push_back(std::move(cur));
      cur.clear();
      in_word = false;
    } else {
      cur += c;
      in_word = true;
    }
  }
  if (quote != 0) usage_error("unterminated quote");
  if (in_word) out.push_back(std::move(cur));
  return out;
}

// Removes "--name value" from args.
std::optional<std::string> take_option(std::vector<std::string>& args, const std::string& name) {
  for (auto it = args.begin(); it != args.end(); ++it) {
    if (*it != name) continue;
    if (std::next(it) == args.end()) usage_error(name + " needs a value");
    std::string value = *std::next(it);
    args.erase(it, it + 2);
    return value;
  }
  return std::nullopt;
}

bool take_flag(std::vector<std::string>& args, const std::string& name) {
  auto it = std::find(args.begin(), args.end(), name);
  if (it == args.end()) return false;
  args.erase(it);
  return true;
}

void want(const std::vector<std::string>& a, std::size_t min, std::size_t max, const char* synopsis) {
  if (a.size() < min || a.size() > max) usage_error(std::string("usage: ") + synopsis);
}

std::optional<aiod::RouteChain> route_option(std::vector<std::string>& a) {
  auto text = take_option(a, "--route");
  if (!text) return std::nullopt;
  if (text->empty() || *text == "direct") return aiod::RouteChain();
  return aiod::RouteChain::parse(*text);
}

std::string describe(const transfer::TransferRequest& r) {
  std::string s = std::to_string(r.id) + " " + std::string(to_string(r.state)) + " " +
                  std::string(to_string(r.kind)) + " " + r.lfn + " " + r.src_se + " -> " + r.dst_se +
                  " attempts=" + std::to_string(r.attempts);
  if (r.last_error) s += " error=\"" + *r.last_error + "\"";
  return s;
}

}  // namespace

int exit_code_for(Errc code) noexcept {
  const auto codes = all_error_codes();
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] == code) return 10 + static_cast<int>(i);
  }
  return kExitInternal;
}

std::vector<std::pair<int, std::string>> exit_code_table() {
  std::vector<std::pair<int, std::string>> out = {{kExitOk, "success"},
                                                  {kExitInternal, "internal error"},
                                                  {kExitUsage, "usage error"}};
  for (auto c : all_error_codes()) out.emplace_back(exit_code_for(c), std::string(to_string(c)));
  return out;
}

std::string Target::str() const {
  if (local) return "local:" + path;
  return se ? path + "@" + *se : path;
}

Target parse_target(std::string_view text, const LfnPath& cwd) {
  constexpr std::string_view kLocal = "local:";
  constexpr std::string_view kGrid = "grid://";
  Target t;
  if (text.substr(0, kLocal.size()) == kLocal) {
    t.local = true;
    t.path = std::string(text.substr(kLocal.size()));
    if (t.path.empty()) fail(Errc::InvalidArgument, "empty local path");
    return t;
  }
  if (text.substr(0, kGrid.size()) == kGrid) text.remove_prefix(kGrid.size() - 1);
  auto [lfn, se] = access::split_se_suffix(text);
  t.path = LfnPath::resolve(cwd, lfn).str();
  t.se = std::move(se);
  return t;
}

ShellConfig ShellConfig::from_json(const json& j) {
  ShellConfig c;
  c.client = access::ClientConfig::from_json(j);
  c.broker = j.value("broker", std::string());
  c.dir_cache_ttl_s = j.value("dir_cache_ttl_s", c.dir_cache_ttl_s);
  if (c.dir_cache_ttl_s < 0) fail(Errc::InvalidArgument, "dir_cache_ttl_s must not be negative");
  return c;
}

ShellConfig load_config(const std::optional<fs::path>& path) {
  fs::path file;
  if (path) {
    file = *path;
  } else if (const char* env = std::getenv("GRIDFS_CONFIG"); env != nullptr && *env != '\0') {
    file = env;
  } else {
    fail(Errc::InvalidArgument, "no configuration: pass --config or set GRIDFS_CONFIG");
  }
  std::ifstream in(file);
  if (!in) fail(Errc::NotFound, "cannot read config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::InvalidArgument, "bad config " + file.string() + ": " + e.what());
  }
  auto c = ShellConfig::from_json(j);
  if (const char* token = std::getenv("GRIDFS_TOKEN"); token != nullptr && *token != '\0') c.client.token = token;
  return c;
}

std::string mode_string(bool is_dir, catalogue::PermissionBits perms) {
  return (is_dir ? "d" : "-") + perms.to_symbolic();
}

std::string long_line(const DirEntry& e) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s %-8s %-8s %12llu %s", mode_string(e.is_dir, e.perms).c_str(), e.owner.c_str(),
                e.group.c_str(), static_cast<unsigned long long>(e.size), e.name.c_str());
  return buf;
}

Shell::Shell(access::GridClient& client, std::optional<transfer::TransferClient> broker, Clock clock,
             double dir_cache_ttl_s)
    : client_(client), broker_(std::move(broker)), clock_(std::move(clock)), ttl_s_(dir_cache_ttl_s) {
  client_.catalogue().whoami();
}

std::string Shell::usage() {
  return "commands:\n"
         "  ls [-l] [path]\n"
         "  mkdir [-p] <path>\n"
         "  cp <src> <dst>              targets: local:<path> | <lfn>[@SE]\n"
         "  rm <lfn>\n"
         "  mv <from> <to>\n"
         "  whereis <lfn>\n"
         "  cat <lfn>[@SE]\n"
         "  meta <lfn> [<name> <value>]\n"
         "  chmod <octal> <path>\n"
         "  chown <user>[:<group>] <path>\n"
         "  aioget <lfn>[@SE] <localpath> [--route h1@h2]\n"
         "  aioput <localpath> <lfn>[@SE] [--route h1@h2]\n"
         "  transfer enqueue <lfn> <dst_se> [--move] [--from <se>]\n"
         "  transfer status <id> | transfer list\n"
         "  cd <path> | pwd | help | exit\n";
}

int Shell::run_line(const std::string& line, std::ostream& out, std::ostream& err) {
  std::vector<std::string> argv;
  try {
    argv = split_words(line);
  } catch (const UsageError& e) {
    err << "gridfs: " << e.what() << "\n";
    return kExitUsage;
  }
  if (argv.empty()) return kExitOk;
  return run(argv, out, err);
}

int Shell::run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  if (argv.empty()) return kExitOk;
  const std::string& cmd = argv[0];
  Args a(argv.begin() + 1, argv.end());
  try {
    if (cmd == "ls") {
      ls(a, out);
    } else if (cmd == "mkdir") {
      mkdir(a);
    } else if (cmd == "cp") {
      cp(a, out);
    } else if (cmd == "rm") {
      rm(a, err);
    } else if (cmd == "mv") {
      mv(a);
    } else if (cmd == "whereis") {
      whereis(a, out);
    } else if (cmd == "cat") {
      cat(a, out);
    } else if (cmd == "meta") {
      meta(a, out);
    } else if (cmd == "chmod") {
      chmod(a);
    } else if (cmd == "chown") {
      chown(a);
    } else if (cmd == "aioget") {
      aioget(a, out);
    } else if (cmd == "aioput") {
      aioput(a, out);
    } else if (cmd == "transfer") {
      transfer(a, out);
    } else if (cmd == "cd") {
      cd(a);
    } else if (cmd == "pwd") {
      want(a, 0, 0, "pwd");
      out << cwd_.str() << "\n";
    } else if (cmd == "help") {
      out << usage();
    } else {
      err << "gridfs: unknown command '" << cmd << "'\n" << usage();
      return kExitUsage;
    }
  } catch (const UsageError& e) {
    err << "gridfs: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "gridfs: " << cmd << ": " << to_string(e.code()) << ": " << e.message() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "gridfs: " << cmd << ": " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

int Shell::repl(std::istream& in, std::ostream& out, std::ostream& err, bool prompt) {
  int last = kExitOk;
  std::string line;
  while (true) {
    if (prompt) out << "gridfs:" << cwd_.str() << "> " << std::flush;
    if (!std::getline(in, line)) break;
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.compare(first, 4, "exit") == 0 || line.compare(first, 4, "quit") == 0) break;
    last = run_line(line, out, err);
  }
  return last;
}

LfnPath Shell::lfn(const std::string& text) const {
  auto t = parse_target(text, cwd_);
  if (t.local) usage_error("expected a grid path, got " + text);
  if (t.se) usage_error("no @SE suffix allowed here: " + text);
  return LfnPath::parse(t.path);
}

const std::vector<DirEntry>& Shell::listing(const LfnPath& dir) {
  const double now = clock_();
  auto it = dir_cache_.find(dir);
  if (it != dir_cache_.end() && now - it->second.at < ttl_s_) {
    ++cache_hits_;
    return it->second.entries;
  }
  auto entries = client_.catalogue().list_dir(dir);
  std::sort(entries.begin(), entries.end(), [](const DirEntry& x, const DirEntry& y) { return x.name < y.name; });
  auto& slot = dir_cache_[dir];
  slot = {now, std::move(entries)};
  return slot.entries;
}

catalogue::Stat Shell::stat(const LfnPath& path) {
  if (!path.is_root()) {
    auto parent = dir_cache_.find(path.parent());
    if (parent != dir_cache_.end() && clock_() - parent->second.at < ttl_s_) {
      for (const auto& e : parent->second.entries) {
        if (e.name == path.basename() && !e.is_virtual) {
          ++cache_hits_;
          return {e.is_dir, e.size, e.owner, e.group, e.perms, std::nullopt};
        }
      }
    }
  }
  return client_.catalogue().stat(path);
}

transfer::TransferClient& Shell::broker() {
  if (!broker_) fail(Errc::InvalidArgument, "no transfer broker configured");
  return *broker_;
}

void Shell::ls(const Args& args, std::ostream& out) {
  Args a = args;
  const bool long_form = take_flag(a, "-l");
  want(a, 0, 1, "ls [-l] [path]");
  const LfnPath path = a.empty() ? cwd_ : lfn(a[0]);
  const auto st = stat(path);
  if (!st.is_dir) {
    DirEntry e{path.is_root() ? "/" : path.basename(), false, false, st.size, st.owner, st.group, st.perms};
    out << (long_form ? long_line(e) : e.name) << "\n";
    return;
  }
  for (const auto& e : listing(path)) out << (long_form ? long_line(e) : e.name) << "\n";
}

void Shell::mkdir(const Args& args) {
  Args a = args;
  const bool parents = take_flag(a, "-p");
  want(a, 1, 1, "mkdir [-p] <path>");
  const LfnPath path = lfn(a[0]);
  invalidate();
  if (!parents) {
    client_.catalogue().mkdir(path, catalogue::PermissionBits(0755));
    return;
  }
  LfnPath cur;
  for (const auto& seg : path.segments()) {
    cur = cur.child(seg);
    try {
      client_.catalogue().mkdir(cur, catalogue::PermissionBits(0755));
    } catch (const Error& e) {
      if (e.code() != Errc::AlreadyExists || !client_.catalogue().stat(cur).is_dir) throw;
    }
  }
}

void Shell::cp(const Args& a, std::ostream& out) {
  want(a, 2, 2, "cp <src> <dst>");
  const Target src = parse_target(a[0], cwd_);
  Target dst = parse_target(a[1], cwd_);
  if (src.local && dst.local) fail(Errc::InvalidArgument, "both sides of cp are local");
  invalidate();
  if (src.local) {
    const LfnPath d = LfnPath::parse(dst.path);
    try {
      if (client_.catalogue().stat(d).is_dir) dst.path = d.child(fs::path(src.path).filename().string()).str();
    } catch (const Error& e) {
      if (e.code() != Errc::NotFound) throw;
    }
    access::aioput(client_, src.path, dst.str());
    return;
  }
  if (dst.local) {
    fs::path local = dst.path;
    if (fs::is_directory(local)) local /= LfnPath::parse(src.path).basename();
    access::aioget(client_, src.str(), local);
    return;
  }
  copy_grid_to_grid(src, dst, out);
}

void Shell::copy_grid_to_grid(const Target& src, const Target& dst, std::ostream& out) {
  if (src.path == dst.path) {
    if (!dst.se || dst.se == src.se) fail(Errc::InvalidArgument, "source and destination are the same file");
    const auto id = broker().enqueue(src.path, *dst.se, transfer::TransferKind::kReplicate, src.se.value_or("any"));
    out << id << "\n";
    return;
  }
  // A new LFN: synchronous copy with a fresh GUID.
  using access::AccessStrategy;
  using access::OpenMode;
  const int in = client_.open(src.str(), OpenMode::kRead, AccessStrategy::kRemotePartial);
  int outh = -1;
  try {
    const std::uint64_t size = client_.info(in).size;
    outh = client_.open(dst.str(), OpenMode::kWriteOnce, AccessStrategy::kRemotePartial,
                        access::OpenOptions{std::nullopt, aiod::AccessKind::kSequential, size});
    for (std::uint64_t off = 0; off < size;) {
      auto chunk = client_.read(in, off, std::min(kChunk, size - off));
      if (chunk.empty()) fail(Errc::SizeMismatch, "short read from " + src.str());
      off += client_.write(outh, off, chunk);
    }
    client_.close(outh);
    outh = -1;
  } catch (...) {
    if (outh >= 0) client_.abort(outh);
    client_.close(in);
    throw;
  }
  client_.close(in);
}

void Shell::rm(const Args& a, std::ostream& err) {
  want(a, 1, 1, "rm <lfn>");
  const LfnPath path = lfn(a[0]);
  invalidate();
  const auto& cfg = client_.config();
  for (const auto& pfn : client_.catalogue().remove(path)) {
    try {
      storage::SeClient(client_.network(), cfg.self, pfn.endpoint(), cfg.token).rm(pfn);
    } catch (const Error& e) {
      err << "gridfs: rm: " << pfn.str() << " left on its storage element: " << to_string(e.code()) << "\n";
    }
  }
}

void Shell::mv(const Args& a) {
  want(a, 2, 2, "mv <from> <to>");
  const LfnPath from = lfn(a[0]);
  LfnPath to = lfn(a[1]);
  try {
    if (client_.catalogue().stat(to).is_dir) to = to.child(from.basename());
  } catch (const Error& e) {
    if (e.code() != Errc::NotFound) throw;
  }
  invalidate();
  client_.catalogue().move(from, to);
}

void Shell::whereis(const Args& a, std::ostream& out) {
  want(a, 1, 1, "whereis <lfn>");
  for (const auto& pfn : client_.catalogue().resolve(lfn(a[0])).pfns) out << pfn.str() << "\n";
}

void Shell::cat(const Args& a, std::ostream& out) {
  want(a, 1, 1, "cat <lfn>[@SE]");
  const Target t = parse_target(a[0], cwd_);
  if (t.local) usage_error("cat reads grid files only");
  const int h = client_.open(t.str(), access::OpenMode::kRead, access::AccessStrategy::kRemotePartial);
  try {
    const std::uint64_t size = client_.info(h).size;
    for (std::uint64_t off = 0; off < size;) {
      auto chunk = client_.read(h, off, std::min(kChunk, size - off));
      if (chunk.empty()) break;
      off += chunk.size();
      out << chunk;
    }
  } catch (...) {
    client_.close(h);
    throw;
  }
  client_.close(h);
}

void Shell::meta(const Args& a, std::ostream& out) {
  if (a.size() != 1 && a.size() != 3) usage_error("usage: meta <lfn> [<name> <value>]");
  const LfnPath path = lfn(a[0]);
  if (a.size() == 3) {
    invalidate();
    client_.catalogue().set_metadata(path, a[1], a[2]);
    return;
  }
  const auto text = client_.catalogue().read_metadata(path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void Shell::chmod(const Args& a) {
  want(a, 2, 2, "chmod <octal> <path>");
  const auto perms = catalogue::PermissionBits::from_octal(a[0]);
  const LfnPath path = lfn(a[1]);
  invalidate();
  client_.catalogue().set_access(path, std::nullopt, std::nullopt, perms);
}

void Shell::chown(const Args& a) {
  want(a, 2, 2, "chown <user>[:<group>] <path>");
  std::optional<std::string> owner = a[0];
  std::optional<std::string> group;
  if (const auto colon = a[0].find(':'); colon != std::string::npos) {
    owner = a[0].substr(0, colon);
    group = a[0].substr(colon + 1);
    if (owner->empty()) owner.reset();
    if (group->empty()) group.reset();
  }
  if (!owner && !group) fail(Errc::InvalidArgument, "chown needs a user or a group");
  const LfnPath path = lfn(a[1]);
  invalidate();
  client_.catalogue().set_access(path, owner, group, std::nullopt);
}

void Shell::aioget(const Args& args, std::ostream& out) {
  Args a = args;
  auto route = route_option(a);
  want(a, 2, 2, "aioget <lfn>[@SE] <localpath> [--route h1@h2]");
  const Target src = parse_target(a[0], cwd_);
  if (src.local) usage_error("aioget reads grid files only");
  std::string local = a[1];
  if (local.rfind("local:", 0) == 0) local = local.substr(6);
  out << access::aioget(client_, src.str(), local, route) << " bytes\n";
}

void Shell::aioput(const Args& args, std::ostream& out) {
  Args a = args;
  auto route = route_option(a);
  want(a, 2, 2, "aioput <localpath> <lfn>[@SE] [--route h1@h2]");
  std::string local = a[0];
  if (local.rfind("local:", 0) == 0) local = local.substr(6);
  const Target dst = parse_target(a[1], cwd_);
  if (dst.local) usage_error("aioput writes grid files only");
  invalidate();
  out << access::aioput(client_, local, dst.str(), route) << " bytes\n";
}

void Shell::transfer(const Args& args, std::ostream& out) {
  Args a = args;
  if (a.empty()) usage_error("usage: transfer enqueue|status|list ...");
  const std::string sub = a[0];
  a.erase(a.begin());
  if (sub == "enqueue") {
    const bool move = take_flag(a, "--move");
    const auto from = take_option(a, "--from");
    want(a, 2, 2, "transfer enqueue <lfn> <dst_se> [--move] [--from <se>]");
    const auto kind = move ? transfer::TransferKind::kMove : transfer::TransferKind::kReplicate;
    out << broker().enqueue(lfn(a[0]).str(), a[1], kind, from.value_or("any")) << "\n";
  } else if (sub == "status") {
    want(a, 1, 1, "transfer status <id>");
    std::uint64_t id = 0;
    try {
      id = std::stoull(a[0]);
    } catch (const std::exception&) {
      usage_error("transfer id must be a number");
    }
    out << describe(broker().query(id)) << "\n";
  } else if (sub == "list") {
    want(a, 0, 0, "transfer list");
    for (const auto& r : broker().list()) out << describe(r) << "\n";
  } else {
    usage_error("usage: transfer enqueue|status|list ...");
  }
}

void Shell::cd(const Args& a) {
  want(a, 0, 1, "cd [path]");
  const LfnPath target = a.empty() ? LfnPath::parse("/" + client_.catalogue().whoami().user) : lfn(a[0]);
  if (!stat(target).is_dir) fail(Errc::InvalidArgument, target.str() + " is not a directory");
  cwd_ = target;
}

}  // namespace gridfs::cli
