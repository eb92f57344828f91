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

#include "gridfs/aiod/route.hpp"

#include "gridfs/common/error.hpp"

namespace gridfs::aiod {

RouteChain::RouteChain(std::vector<wire::Address> hops) : hops_(std::move(hops)) {
  for (std::size_t i = 0; i < hops_.size(); ++i) {
    if (hops_[i].empty()) fail(Errc::InvalidArgument, "route has an empty hop");
    if (hops_[i].find('@') != std::string::npos) fail(Errc::InvalidArgument, "route hop contains '@'");
    if (i > 0 && hops_[i] == hops_[i - 1]) fail(Errc::InvalidArgument, "route repeats hop " + hops_[i]);
  }
}

RouteChain RouteChain::parse(std::string_view text) {
  if (text.empty()) fail(Errc::InvalidArgument, "empty route");
  std::vector<wire::Address> hops;
  std::size_t start = 0;
  while (true) {
    auto at = text.find('@', start);
    hops.emplace_back(text.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return RouteChain(std::move(hops));
}

std::string RouteChain::str() const {
  std::string out;
  for (const auto& h : hops_) {
    if (!out.empty()) out += '@';
    out += h;
  }
  return out;
}

RouteChain RouteChain::with_hop(std::size_t i, wire::Address address) const {
  auto hops = hops_;
  if (i + 1 < hops.size() && hops[i + 1] == address) {
    hops.erase(hops.begin() + static_cast<std::ptrdiff_t>(i));
  } else {
    hops.at(i) = std::move(address);
  }
  return RouteChain(std::move(hops));
}

}  // namespace gridfs::aiod
