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

#include <string>
#include <string_view>
#include <vector>

#include "gridfs/wire/network.hpp"

namespace gridfs::aiod {

using json = nlohmann::json;

// Ordered forwarding path, client-nearest hop first. Text form h1@h2@h3.
// A default-constructed chain is empty and means "no cache hops".
class RouteChain {
 public:
  RouteChain() = default;
  explicit RouteChain(std::vector<wire::Address> hops);

  // Throws InvalidArgument on empty text, empty hops or repeated adjacent hops.
  static RouteChain parse(std::string_view text);

  std::string str() const;
  bool empty() const noexcept { return hops_.empty(); }
  std::size_t size() const noexcept { return hops_.size(); }
  const wire::Address& operator[](std::size_t i) const { return hops_.at(i); }
  const std::vector<wire::Address>& hops() const noexcept { return hops_; }

  // Copy with hop i replaced; used when following a redirect. A replacement
  // equal to the following hop collapses into it.
  RouteChain with_hop(std::size_t i, wire::Address address) const;

  friend bool operator==(const RouteChain&, const RouteChain&) = default;

 private:
  std::vector<wire::Address> hops_;
};

}  // namespace gridfs::aiod
