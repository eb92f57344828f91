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

// gridfs: grid file system client. Runs one shell command, or an
// interactive shell with "gridfs shell".
#include <unistd.h>

#include <chrono>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "gridfs/access/client.hpp"
#include "gridfs/cli/shell.hpp"
#include "gridfs/common/error.hpp"
#include "gridfs/transfer/broker.hpp"
#include "gridfs/wire/tcp.hpp"

using namespace gridfs;

namespace {

double wall_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

int print_exit_codes() {
  std::cout << "code  meaning\n";
  for (const auto& [code, name] : cli::exit_code_table()) {
    std::cout << (code < 10 ? " " : "") << code << "    " << name << "\n";
  }
  return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridfs client"};
  app.prefix_command();
  std::string config_path;
  app.add_option("-c,--config", config_path, "client configuration file (default: $GRIDFS_CONFIG)");
  app.footer(cli::Shell::usage() + "  shell\n  exit-codes\n");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }
  std::vector<std::string> args = app.remaining();
  if (args.empty()) {
    std::cerr << app.help();
    return cli::kExitUsage;
  }
  if (args.front() == "exit-codes") return print_exit_codes();

  try {
    std::optional<std::filesystem::path> path;
    if (!config_path.empty()) path = config_path;
    const auto config = cli::load_config(path);

    wire::TcpNetwork net;
    access::GridClient client(net, config.client);
    try {
      client.publish_credential();
    } catch (const Error&) {
    }
    std::optional<transfer::TransferClient> broker;
    if (!config.broker.empty()) broker.emplace(net, config.client.self, config.broker, config.client.token);
    cli::Shell shell(client, std::move(broker), wall_seconds, config.dir_cache_ttl_s);

    if (args.front() == "shell") {
      if (args.size() != 1) {
        std::cerr << "usage: gridfs shell\n";
        return cli::kExitUsage;
      }
      return shell.repl(std::cin, std::cout, std::cerr, isatty(STDIN_FILENO) != 0);
    }
    return shell.run(args, std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << "gridfs: " << to_string(e.code()) << ": " << e.message() << "\n";
    return cli::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "gridfs: " << e.what() << "\n";
    return cli::kExitInternal;
  }
}
