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
#include <optional>

#include <json.hpp>

namespace gridfs::sim {

using json = nlohmann::json;

struct ScenarioOptions {
  bool include_events = true;
  std::optional<std::uint64_t> seed;  // overrides the scenario's seed
};

// Runs a scripted scenario on a fresh simulated grid under `root`.
//
// Scenario: {"grid": <GridSpec keys, or absent for the standard grid>,
//            "seed": n, "steps": [...]}. Step ops:
//   shell        {user, cmd}
//   write        {user, target, size, seed?, route?, strategy?}
//   read         {user, lfn, route?, strategy?}
//   partition    {node} / heal {node}
//   broker_step  {}
//   advance_ms   {ms}
//   report_load  {server}
//   resync / expire {se}
//
// The report lists each step's outcome, the network counters, the virtual
// clock, the trace hash, and optionally the event trace.
json run_scenario(const json& scenario, const std::filesystem::path& root, const ScenarioOptions& options = {});

}  // namespace gridfs::sim
