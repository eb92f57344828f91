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

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>

namespace gridfs {

// 128-bit identifier labelling immutable file content. Text form is
// lowercase hex with dashes, 8-4-4-4-12.
class Guid {
 public:
  Guid() = default;
  explicit Guid(const std::array<std::uint8_t, 16>& bytes) : bytes_(bytes) {}

  // Random version-4 GUID drawn from the given engine.
  static Guid random(std::mt19937_64& rng);
  static Guid parse(std::string_view text);  // throws Error(InvalidArgument)
  static bool valid(std::string_view text) noexcept;

  std::string to_string() const;
  // First two hex characters; used for directory fan-out.
  std::string prefix() const { return to_string().substr(0, 2); }
  bool is_nil() const noexcept;
  const std::array<std::uint8_t, 16>& bytes() const noexcept { return bytes_; }

  friend auto operator<=>(const Guid&, const Guid&) = default;

 private:
  std::array<std::uint8_t, 16> bytes_{};
};

}  // namespace gridfs

template <>
struct std::hash<gridfs::Guid> {
  std::size_t operator()(const gridfs::Guid& g) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto b : g.bytes()) {
      h ^= b;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};
