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

#include "gridfs/aiod/ticket.hpp"

#include "gridfs/common/error.hpp"

namespace gridfs::aiod {

std::string_view to_string(SessionMode mode) noexcept { return mode == SessionMode::kWrite ? "write" : "read"; }

SessionMode session_mode_from_string(std::string_view text) {
  if (text == "read") return SessionMode::kRead;
  if (text == "write") return SessionMode::kWrite;
  fail(Errc::InvalidArgument, "unknown session mode '" + std::string(text) + "'");
}

json AccessTicket::to_json() const {
  json j = {{"route", route.str()},
            {"grid_user", grid_user},
            {"credential_ref", credential_ref},
            {"lfn", lfn},
            {"guid", guid.to_string()},
            {"encryption", encryption}};
  if (pfn) j["pfn"] = pfn->str();
  if (!se.empty()) j["se"] = se;
  return j;
}

AccessTicket AccessTicket::from_json(const json& j) {
  try {
    AccessTicket t;
    t.route = RouteChain::parse(j.at("route").get<std::string>());
    t.grid_user = j.at("grid_user").get<std::string>();
    t.credential_ref = j.at("credential_ref").get<std::string>();
    t.lfn = j.at("lfn").get<std::string>();
    t.guid = Guid::parse(j.at("guid").get<std::string>());
    t.encryption = j.value("encryption", std::string("none"));
    if (j.contains("pfn")) t.pfn = catalogue::Pfn::parse(j["pfn"].get<std::string>());
    t.se = j.value("se", std::string());
    if (t.encryption != "none" && t.encryption != "stub") fail(Errc::TicketInvalid, "unknown encryption " + t.encryption);
    return t;
  } catch (const json::exception& e) {
    fail(Errc::TicketInvalid, std::string("malformed ticket: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::TicketInvalid) throw;
    fail(Errc::TicketInvalid, "malformed ticket: " + e.message());
  }
}

std::string seal_page(std::string_view, std::string data) { return data; }
std::string open_page(std::string_view, std::string data) { return data; }

}  // namespace gridfs::aiod
