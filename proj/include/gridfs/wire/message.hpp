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

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gridfs/common/error.hpp"

namespace gridfs::wire {

using json = nlohmann::json;

// One protocol exchange unit: a structured frame plus an optional raw-bytes
// frame. When `data` is non-empty the structured body carries `data_len`.
//
// On the wire:
//   u32be len | json body
//   [u32be len | raw bytes]      present iff body has "data_len"
struct Message {
  json body = json::object();
  std::string data;
};

Message make_request(std::string_view op, json args, std::string_view auth, std::string data = {});
Message make_ok(json value, std::string data = {});
Message make_error(Errc code, std::string_view message);
Message make_error(const Error& error);

std::string encode(const Message& message);
// Decodes exactly one message; throws Error(ProtocolError) on malformed input.
Message decode(std::string_view bytes);

// Number of bytes the next message occupies in `buffer`, or 0 if the buffer
// does not yet hold a complete message.
std::size_t complete_message_size(std::string_view buffer);

void append_u32_be(std::string& out, std::uint32_t value);
std::uint32_t read_u32_be(std::string_view bytes);

// Returns body["value"] for ok responses, throws the carried Error otherwise.
json expect_ok(const Message& response);

const std::string& op_of(const Message& request);
const json& args_of(const Message& request);
std::string auth_of(const Message& request);

}  // namespace gridfs::wire
