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

#include <fstream>

#include <gtest/gtest.h>

#include "gridfs/cli/shell.hpp"
#include "gridfs/common/error.hpp"
#include "gridfs/sim/scenario.hpp"
#include "support.hpp"

namespace gridfs::sim {
namespace {

using gridfs::testing::TempDir;

json load_integration() {
  std::ifstream in(std::string(GRIDFS_SCENARIO_DIR) + "/integration.json");
  return json::parse(in);
}

json run_fresh(const json& scenario, const ScenarioOptions& options = {}) {
  TempDir tmp;
  return run_scenario(scenario, tmp.path(), options);
}

TEST(ScenarioTest, SameSeedSameReport) {
  const auto scenario = load_integration();
  const auto a = run_fresh(scenario);
  const auto b = run_fresh(scenario);
  const auto c = run_fresh(scenario);
  EXPECT_EQ(a, b);
  EXPECT_EQ(b, c);
  EXPECT_EQ(a.at("trace_length").get<std::size_t>(), a.at("events").size());
}

TEST(ScenarioTest, SeedOverrideChangesGuids) {
  const auto scenario = load_integration();
  ScenarioOptions o;
  o.include_events = false;
  const auto a = run_fresh(scenario, o);
  o.seed = 99;
  const auto b = run_fresh(scenario, o);
  EXPECT_EQ(b.at("seed"), 99);
  // whereis output carries seed-drawn GUIDs; frame sizes and timing do not.
  EXPECT_NE(a.at("steps")[7].at("out"), b.at("steps")[7].at("out"));
  EXPECT_EQ(a.at("trace_length"), b.at("trace_length"));
  EXPECT_FALSE(a.contains("events"));
}

TEST(ScenarioTest, IntegrationScenarioOutcomes) {
  const auto r = run_fresh(load_integration(), {false, std::nullopt});
  const auto& steps = r.at("steps");
  for (const auto& s : steps) EXPECT_TRUE(s.at("ok").get<bool>()) << s.dump();
  // Every read returns what was written to that LFN.
  EXPECT_EQ(steps[3].at("fnv"), steps[1].at("fnv"));
  EXPECT_EQ(steps[4].at("fnv"), steps[1].at("fnv"));
  EXPECT_EQ(steps[11].at("fnv"), steps[2].at("fnv"));
  EXPECT_EQ(steps[13].at("fnv"), steps[1].at("fnv"));
  // eve is refused with the PermissionDenied exit code.
  EXPECT_EQ(steps[16].at("exit"), cli::exit_code_for(Errc::PermissionDenied));
  EXPECT_EQ(r.at("frames").at("sent").get<int>(),
            r.at("frames").at("delivered").get<int>() + r.at("frames").at("dropped").get<int>());
}

TEST(ScenarioTest, StepErrorsAreRecorded) {
  const json scenario = {{"seed", 1},
                         {"steps", json::array({{{"op", "read"}, {"user", "alice"}, {"lfn", "/alice/none"}},
                                                {{"op", "shell"}, {"user", "alice"}, {"cmd", "pwd"}}})}};
  const auto r = run_fresh(scenario, {false, std::nullopt});
  EXPECT_FALSE(r["steps"][0]["ok"].get<bool>());
  EXPECT_EQ(r["steps"][0]["error"], "NotFound");
  EXPECT_EQ(r["steps"][1]["out"], "/\n");
}

TEST(ScenarioTest, UnknownOpRejected) {
  const json scenario = {{"seed", 1}, {"steps", json::array({{{"op", "explode"}}})}};
  try {
    run_fresh(scenario);
    FAIL() << "expected InvalidArgument";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidArgument);
  }
}

}  // namespace
}  // namespace gridfs::sim
