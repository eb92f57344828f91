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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gridfs {

// Error names travel on the wire verbatim, so the spelling of each
// enumerator's text form is part of the protocol.
enum class Errc {
  NotFound,
  PermissionDenied,
  AlreadyExists,
  DuplicateGuid,
  SizeMismatch,
  DuplicateReplica,
  IsDirectory,
  InvalidArgument,
  Unauthenticated,
  NoSpace,
  NotAllocated,
  QuotaExceeded,
  BackendFailure,
  RangeError,
  ProducerFailure,
  CrossVolumeLink,
  Unreachable,
  BadHandle,
  TransportError,
  NonSequentialWrite,
  SizeValidationFailed,
  RegistrationFailed,
  AlreadyReplicated,
  UnknownSe,
  TicketInvalid,
  Redirect,
  NoFreshReports,
  LinkDown,
  NoRoute,
  UnknownNode,
  ProtocolError,
};

std::string_view to_string(Errc code) noexcept;
std::optional<Errc> errc_from_string(std::string_view name) noexcept;

// Every error code in declaration order; used by the CLI exit-code table.
std::span<const Errc> all_error_codes() noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  static Error redirect(std::string address);

  Errc code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  // Target address of a Redirect; empty for every other code.
  const std::string& redirect_address() const noexcept { return redirect_; }

 private:
  Errc code_;
  std::string message_;
  std::string redirect_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace gridfs
