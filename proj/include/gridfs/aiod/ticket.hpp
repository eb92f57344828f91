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

#include <optional>
#include <string>

#include "gridfs/aiod/route.hpp"
#include "gridfs/catalogue/types.hpp"
#include "gridfs/common/guid.hpp"

namespace gridfs::aiod {

enum class SessionMode { kRead, kWrite };

std::string_view to_string(SessionMode mode) noexcept;
SessionMode session_mode_from_string(std::string_view text);

// Everything an aiod needs to validate and serve one access.
struct AccessTicket {
  RouteChain route;
  std::string grid_user;
  std::string credential_ref;  // catalogue path holding the user's credential
  std::string lfn;
  std::optional<catalogue::Pfn> pfn;  // replica to read; absent for writes
  Guid guid;
  std::string encryption = "none";  // none | stub
  wire::Address se;                 // write target

  json to_json() const;
  static AccessTicket from_json(const json& j);
};

// Per-page envelope. Both kinds are the identity transform.
std::string seal_page(std::string_view encryption, std::string data);
std::string open_page(std::string_view encryption, std::string data);

}  // namespace gridfs::aiod
