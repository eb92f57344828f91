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

#include "gridfs/common/error.hpp"

#include <array>
#include <span>

namespace gridfs {
namespace {

struct ErrcName {
  Errc code;
  std::string_view name;
};

constexpr std::array kNames{
    ErrcName{Errc::NotFound, "NotFound"},
    ErrcName{Errc::PermissionDenied, "PermissionDenied"},
    ErrcName{Errc::AlreadyExists, "AlreadyExists"},
    ErrcName{Errc::DuplicateGuid, "DuplicateGuid"},
    ErrcName{Errc::SizeMismatch, "SizeMismatch"},
    ErrcName{Errc::DuplicateReplica, "DuplicateReplica"},
    ErrcName{Errc::IsDirectory, "IsDirectory"},
    ErrcName{Errc::InvalidArgument, "InvalidArgument"},
    ErrcName{Errc::Unauthenticated, "Unauthenticated"},
    ErrcName{Errc::NoSpace, "NoSpace"},
    ErrcName{Errc::NotAllocated, "NotAllocated"},
    ErrcName{Errc::QuotaExceeded, "QuotaExceeded"},
    ErrcName{Errc::BackendFailure, "BackendFailure"},
    ErrcName{Errc::RangeError, "RangeError"},
    ErrcName{Errc::ProducerFailure, "ProducerFailure"},
    ErrcName{Errc::CrossVolumeLink, "CrossVolumeLink"},
    ErrcName{Errc::Unreachable, "Unreachable"},
    ErrcName{Errc::BadHandle, "BadHandle"},
    ErrcName{Errc::TransportError, "TransportError"},
    ErrcName{Errc::NonSequentialWrite, "NonSequentialWrite"},
    ErrcName{Errc::SizeValidationFailed, "SizeValidationFailed"},
    ErrcName{Errc::RegistrationFailed, "RegistrationFailed"},
    ErrcName{Errc::AlreadyReplicated, "AlreadyReplicated"},
    ErrcName{Errc::UnknownSe, "UnknownSe"},
    ErrcName{Errc::TicketInvalid, "TicketInvalid"},
    ErrcName{Errc::Redirect, "Redirect"},
    ErrcName{Errc::NoFreshReports, "NoFreshReports"},
    ErrcName{Errc::LinkDown, "LinkDown"},
    ErrcName{Errc::NoRoute, "NoRoute"},
    ErrcName{Errc::UnknownNode, "UnknownNode"},
    ErrcName{Errc::ProtocolError, "ProtocolError"},
};

constexpr auto kCodes = [] {
  std::array<Errc, kNames.size()> codes{};
  for (std::size_t i = 0; i < kNames.size(); ++i) codes[i] = kNames[i].code;
  return codes;
}();

}  // namespace

std::string_view to_string(Errc code) noexcept {
  for (const auto& entry : kNames) {
    if (entry.code == code) return entry.name;
  }
  return "Unknown";
}

std::optional<Errc> errc_from_string(std::string_view name) noexcept {
  for (const auto& entry : kNames) {
    if (entry.name == name) return entry.code;
  }
  return std::nullopt;
}

std::span<const Errc> all_error_codes() noexcept { return kCodes; }

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(message) {}

Error Error::redirect(std::string address) {
  Error e(Errc::Redirect, "redirect to " + address);
  e.redirect_ = std::move(address);
  return e;
}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace gridfs
