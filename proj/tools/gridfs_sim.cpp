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

// gridfs-sim: runs a scripted scenario on the simulated grid and prints a
// JSON report with the event trace.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gridfs/common/error.hpp"
#include "gridfs/sim/scenario.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Run a gridfs scenario on the simulated network"};
  std::string scenario_path;
  std::string out_path;
  std::string root_arg;
  std::optional<std::uint64_t> seed;
  bool no_events = false;
  app.add_option("scenario", scenario_path, "scenario JSON file")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_path, "write the report here instead of stdout");
  app.add_option("--seed", seed, "override the scenario seed");
  app.add_option("--root", root_arg, "scratch directory (default: a fresh temporary one)");
  app.add_flag("--no-events", no_events, "omit the per-frame event list");
  CLI11_PARSE(app, argc, argv);

  fs::path root;
  bool owns_root = false;
  if (root_arg.empty()) {
    std::string tmpl = (fs::temp_directory_path() / "gridfs-sim-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) {
      std::cerr << "gridfs-sim: cannot create a scratch directory\n";
      return 1;
    }
    root = tmpl;
    owns_root = true;
  } else {
    root = root_arg;
    fs::create_directories(root);
  }

  int rc = 0;
  try {
    std::ifstream in(scenario_path);
    const auto scenario = gridfs::sim::json::parse(in);
    gridfs::sim::ScenarioOptions options;
    options.include_events = !no_events;
    options.seed = seed;
    const auto report = gridfs::sim::run_scenario(scenario, root, options);
    const auto text = report.dump(2, ' ', false, gridfs::sim::json::error_handler_t::replace);
    if (out_path.empty()) {
      std::cout << text << "\n";
    } else {
      std::ofstream(out_path) << text << "\n";
    }
  } catch (const gridfs::Error& e) {
    std::cerr << "gridfs-sim: " << to_string(e.code()) << ": " << e.message() << "\n";
    rc = 1;
  } catch (const std::exception& e) {
    std::cerr << "gridfs-sim: " << e.what() << "\n";
    rc = 1;
  }
  if (owns_root) {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  return rc;
}
