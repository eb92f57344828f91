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

#include "gridfs/sim/scenario.hpp"

#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "gridfs/cli/shell.hpp"
#include "gridfs/common/hash.hpp"
#include "gridfs/sim/grid.hpp"

namespace gridfs::sim {
namespace {

const std::set<std::string> kOps = {"shell", "write", "read", "partition", "heal", "broker_step",
                                     "advance_ms", "report_load", "resync", "expire"};

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

access::AccessStrategy strategy_of(const json& step) {
  const auto s = step.value("strategy", std::string("remote"));
  if (s == "remote") return access::AccessStrategy::kRemotePartial;
  if (s == "local") return access::AccessStrategy::kWholeFileLocal;
  fail(Errc::InvalidArgument, "unknown strategy '" + s + "'");
}

access::OpenOptions options_of(const json& step) {
  access::OpenOptions o;
  if (step.contains("route")) {
    const auto r = step["route"].get<std::string>();
    o.route = r.empty() ? aiod::RouteChain() : aiod::RouteChain::parse(r);
  }
  return o;
}

class Runner {
 public:
  explicit Runner(SimGrid& grid) : grid_(grid) {}

  json step(const json& s) {
    const auto op = s.at("op").get<std::string>();
    if (kOps.count(op) == 0) fail(Errc::InvalidArgument, "unknown scenario op '" + op + "'");
    json r = {{"op", op}};
    try {
      if (op == "shell") {
        const auto user = s.at("user").get<std::string>();
        std::ostringstream out;
        std::ostringstream err;
        r["exit"] = shell(user).run_line(s.at("cmd").get<std::string>(), out, err);
        r["out"] = out.str();
        if (!err.str().empty()) r["err"] = err.str();
      } else if (op == "write") {
        auto& c = grid_.client(s.at("user").get<std::string>());
        std::mt19937_64 rng(s.value("seed", std::uint64_t{1}));
        std::string data(s.at("size").get<std::size_t>(), '\0');
        for (auto& ch : data) ch = static_cast<char>(rng() & 0xff);
        auto o = options_of(s);
        o.size_hint = data.size();
        const int h = c.open(s.at("target").get<std::string>(), access::OpenMode::kWriteOnce, strategy_of(s), o);
        try {
          c.write(h, 0, data);
        } catch (...) {
          c.abort(h);
          throw;
        }
        c.close(h);
        r["bytes"] = data.size();
        r["fnv"] = hex(fnv1a(data));
      } else if (op == "read") {
        auto& c = grid_.client(s.at("user").get<std::string>());
        const int h = c.open(s.at("lfn").get<std::string>(), access::OpenMode::kRead, strategy_of(s), options_of(s));
        std::string data;
        try {
          data = c.read(h, 0, c.info(h).size);
        } catch (...) {
          c.close(h);
          throw;
        }
        c.close(h);
        r["bytes"] = data.size();
        r["fnv"] = hex(fnv1a(data));
      } else if (op == "partition") {
        grid_.net().partition(s.at("node").get<std::string>());
      } else if (op == "heal") {
        grid_.net().heal(s.at("node").get<std::string>());
      } else if (op == "broker_step") {
        r["executed"] = grid_.broker().step();
      } else if (op == "advance_ms") {
        grid_.net().advance_to(grid_.net().now_us() + s.at("ms").get<std::int64_t>() * 1000);
      } else if (op == "report_load") {
        grid_.aiod(s.at("server").get<std::string>()).report_load();
      } else if (op == "resync") {
        r["report"] = grid_.se(s.at("se").get<std::string>()).resync().to_json();
      } else if (op == "expire") {
        r["expired"] = grid_.se(s.at("se").get<std::string>()).expire_files();
      }
      r["ok"] = true;
    } catch (const Error& e) {
      r["ok"] = false;
      r["error"] = std::string(to_string(e.code()));
      r["msg"] = e.message();
    }
    r["t_us"] = grid_.net().now_us();
    return r;
  }

 private:
  cli::Shell& shell(const std::string& user) {
    auto it = shells_.find(user);
    if (it != shells_.end()) return *it->second;
    auto* net = &grid_.net();
    auto sh = std::make_unique<cli::Shell>(
        grid_.client(user), transfer::TransferClient(*net, "client-" + user, "broker:7300", grid_.token(user)),
        [net] { return net->now_us() / 1e6; });
    return *shells_.emplace(user, std::move(sh)).first->second;
  }

  SimGrid& grid_;
  std::map<std::string, std::unique_ptr<cli::Shell>> shells_;
};

}  // namespace

json run_scenario(const json& scenario, const std::filesystem::path& root, const ScenarioOptions& options) {
  const std::uint64_t seed = options.seed.value_or(scenario.value("seed", std::uint64_t{1}));
  GridSpec spec = scenario.contains("grid") ? GridSpec::from_json(scenario["grid"], root) : GridSpec::standard(root);
  spec.seed = seed;
  SimGrid grid(spec);
  grid.net().keep_trace(options.include_events);

  Runner runner(grid);
  json steps = json::array();
  for (const auto& s : scenario.value("steps", json::array())) steps.push_back(runner.step(s));

  json report = {{"seed", seed},
                 {"steps", std::move(steps)},
                 {"frames",
                  {{"sent", grid.net().frames_sent()},
                   {"delivered", grid.net().frames_delivered()},
                   {"dropped", grid.net().frames_dropped()}}},
                 {"virtual_time_us", grid.net().now_us()},
                 {"trace_length", grid.net().trace_length()},
                 {"trace_hash", grid.net().trace_hash_hex()}};
  if (options.include_events) report["events"] = grid.net().trace_json();
  return report;
}

}  // namespace gridfs::sim
