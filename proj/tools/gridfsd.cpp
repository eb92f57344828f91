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

// gridfsd: runs one grid service (catalogue, se, aiod or broker) over TCP
// until SIGINT or SIGTERM.
#include <signal.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "gridfs/aiod/server.hpp"
#include "gridfs/catalogue/service.hpp"
#include "gridfs/common/error.hpp"
#include "gridfs/storage/service.hpp"
#include "gridfs/transfer/broker.hpp"
#include "gridfs/wire/tcp.hpp"

using namespace gridfs;
using json = nlohmann::json;

namespace {

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::NotFound, "cannot open " + path);
  return json::parse(in);
}

// Blocks until a termination signal, calling `tick` every `period_ms`.
void wait_for_signal(const sigset_t& set, std::int64_t period_ms, const std::function<void()>& tick) {
  for (;;) {
    timespec ts{static_cast<time_t>(period_ms / 1000), static_cast<long>((period_ms % 1000) * 1000000)};
    const int sig = sigtimedwait(&set, nullptr, &ts);
    if (sig == SIGINT || sig == SIGTERM) return;
    if (tick) {
      try {
        tick();
      } catch (const Error& e) {
        std::cerr << "gridfsd: " << to_string(e.code()) << ": " << e.message() << "\n";
      }
    }
  }
}

void serve(wire::Service& service, const std::string& listen, const sigset_t& set, std::int64_t period_ms = 1000,
           const std::function<void()>& tick = {}) {
  auto [host, port] = wire::split_host_port(listen);
  wire::TcpServer server(service, host, port);
  server.start();
  std::cerr << "gridfsd: listening on " << server.address() << "\n";
  wait_for_signal(set, period_ms, tick);
  server.stop();
}

void run_catalogue(const json& j, const sigset_t& set) {
  catalogue::CatalogueOptions o;
  o.superuser = j.value("superuser", o.superuser);
  if (j.contains("journal_path")) o.journal_path = j["journal_path"].get<std::string>();
  o.snapshot_every_n_ops = j.value("snapshot_every_n_ops", o.snapshot_every_n_ops);
  o.seed = j.value("seed", o.seed);
  catalogue::Catalogue cat(o);
  const auto auth = catalogue::AuthTable::from_json(j.at("users"));
  catalogue::CatalogueService service(cat, auth);
  serve(service, j.at("listen").get<std::string>(), set);
}

void run_se(const json& j, const sigset_t& set) {
  auto config = storage::SeConfig::from_json(j);
  storage::StorageElement se(config, [] { return static_cast<std::int64_t>(std::time(nullptr)); });
  const auto auth = catalogue::AuthTable::from_json(j.value("users", json::array()));
  storage::SeService service(se, &auth);
  serve(service, config.listen, set);
}

void run_aiod(const json& j, const sigset_t& set) {
  auto config = aiod::AiodConfig::from_json(j);
  wire::TcpNetwork net;
  aiod::AiodServer server(net, config);
  const std::int64_t period = j.value("report_interval_ms", std::int64_t{2000});
  std::function<void()> tick;
  if (!config.gatekeeper.empty()) tick = [&server] { server.report_load(); };
  serve(server, config.listen, set, period, tick);
}

void run_broker(const json& j, const sigset_t& set) {
  auto config = transfer::BrokerConfig::from_json(j);
  wire::TcpNetwork net;
  transfer::TransferBroker broker(net, config);
  transfer::TransferService service(broker);
  const std::int64_t period = j.value("step_interval_ms", std::int64_t{500});
  serve(service, config.listen, set, period, [&broker] { broker.step(); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridfs service daemon"};
  app.require_subcommand(1);
  std::string config_path;
  const std::map<std::string, std::function<void(const json&, const sigset_t&)>> runners = {
      {"catalogue", run_catalogue}, {"se", run_se}, {"aiod", run_aiod}, {"broker", run_broker}};
  for (const auto& [name, fn] : runners) {
    auto* sub = app.add_subcommand(name, "run the " + name + " service");
    sub->add_option("-c,--config", config_path, "service configuration file")->required();
  }
  CLI11_PARSE(app, argc, argv);

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  signal(SIGPIPE, SIG_IGN);

  try {
    const auto j = read_config(config_path);
    runners.at(app.get_subcommands().front()->get_name())(j, set);
  } catch (const Error& e) {
    std::cerr << "gridfsd: " << to_string(e.code()) << ": " << e.message() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "gridfsd: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
