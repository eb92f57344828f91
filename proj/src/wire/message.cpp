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

#include "gridfs/wire/message.hpp"

namespace gridfs::wire {
namespace {

constexpr std::size_t kMaxFrame = 0xffffffffu;

void check_frame_size(std::size_t n) {
  if (n > kMaxFrame) fail(Errc::ProtocolError, "frame exceeds 4 GiB");
}

}  // namespace

void append_u32_be(std::string& out, std::uint32_t value) {
  out.push_back(static_cast<char>(value >> 24));
  out.push_back(static_cast<char>(value >> 16));
  out.push_back(static_cast<char>(value >> 8));
  out.push_back(static_cast<char>(value));
}

std::uint32_t read_u32_be(std::string_view bytes) {
  if (bytes.size() < 4) fail(Errc::ProtocolError, "truncated length prefix");
  auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])); };
  return b(0) << 24 | b(1) << 16 | b(2) << 8 | b(3);
}

Message make_request(std::string_view op, json args, std::string_view auth, std::string data) {
  Message m;
  m.body = {{"op", op}, {"args", std::move(args)}, {"auth", auth}};
  m.data = std::move(data);
  return m;
}

Message make_ok(json value, std::string data) {
  Message m;
  m.body = {{"ok", true}, {"value", std::move(value)}};
  m.data = std::move(data);
  return m;
}

Message make_error(Errc code, std::string_view message) {
  Message m;
  m.body = {{"ok", false}, {"error", to_string(code)}, {"msg", message}};
  return m;
}

Message make_error(const Error& error) {
  Message m = make_error(error.code(), error.message());
  if (error.code() == Errc::Redirect) m.body["addr"] = error.redirect_address();
  return m;
}

std::string encode(const Message& message) {
  json body = message.body;
  if (!message.data.empty()) {
    body["data_len"] = message.data.size();
  } else {
    body.erase("data_len");
  }
  std::string text = body.dump();
  check_frame_size(text.size());
  check_frame_size(message.data.size());

  std::string out;
  out.reserve(8 + text.size() + message.data.size());
  append_u32_be(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  if (!message.data.empty()) {
    append_u32_be(out, static_cast<std::uint32_t>(message.data.size()));
    out += message.data;
  }
  return out;
}

std::size_t complete_message_size(std::string_view buffer) {
  if (buffer.size() < 4) return 0;
  std::size_t body_len = read_u32_be(buffer);
  if (buffer.size() < 4 + body_len) return 0;
  json body = json::parse(buffer.substr(4, body_len), nullptr, false);
  if (body.is_discarded() || !body.is_object()) fail(Errc::ProtocolError, "structured frame is not a JSON object");
  std::size_t total = 4 + body_len;
  if (body.contains("data_len")) {
    if (buffer.size() < total + 4) return 0;
    std::size_t data_len = read_u32_be(buffer.substr(total));
    total += 4 + data_len;
    if (buffer.size() < total) return 0;
  }
  return total;
}

Message decode(std::string_view bytes) {
  std::size_t body_len = read_u32_be(bytes);
  if (bytes.size() < 4 + body_len) fail(Errc::ProtocolError, "truncated structured frame");
  Message m;
  m.body = json::parse(bytes.substr(4, body_len), nullptr, false);
  if (m.body.is_discarded() || !m.body.is_object()) fail(Errc::ProtocolError, "structured frame is not a JSON object");
  std::size_t pos = 4 + body_len;
  if (m.body.contains("data_len")) {
    auto declared = m.body["data_len"].get<std::uint64_t>();
    std::size_t raw_len = read_u32_be(bytes.substr(pos));
    if (raw_len != declared) fail(Errc::ProtocolError, "raw frame length disagrees with data_len");
    pos += 4;
    if (bytes.size() < pos + raw_len) fail(Errc::ProtocolError, "truncated raw frame");
    m.data.assign(bytes.substr(pos, raw_len));
    pos += raw_len;
    m.body.erase("data_len");
  }
  if (pos != bytes.size()) fail(Errc::ProtocolError, "trailing bytes after message");
  return m;
}

json expect_ok(const Message& response) {
  const json& body = response.body;
  if (body.value("ok", false)) return body.contains("value") ? body["value"] : json();
  auto name = body.value("error", std::string("ProtocolError"));
  auto msg = body.value("msg", std::string());
  auto code = errc_from_string(name).value_or(Errc::ProtocolError);
  if (code == Errc::Redirect) throw Error::redirect(body.value("addr", std::string()));
  throw Error(code, msg);
}

const std::string& op_of(const Message& request) {
  auto it = request.body.find("op");
  if (it == request.body.end() || !it->is_string()) fail(Errc::ProtocolError, "request without op");
  return it->get_ref<const std::string&>();
}

const json& args_of(const Message& request) {
  static const json empty = json::object();
  auto it = request.body.find("args");
  return it == request.body.end() ? empty : *it;
}

std::string auth_of(const Message& request) { return request.body.value("auth", std::string()); }

}  // namespace gridfs::wire
