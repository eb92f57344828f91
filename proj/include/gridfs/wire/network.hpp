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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gridfs/wire/message.hpp"

namespace gridfs::wire {

// "host:port" or a bare node name.
using Address = std::string;

// Server side of the protocol: one request in, one response out. Errors are
// reported inside the response, never thrown across the transport.
class Service {
 public:
  virtual ~Service() = default;
  virtual Message handle(const Address& caller, const Message& request) = 0;
};

// Transport abstraction shared by the deterministic simulator and real
// sockets. Also owns the notion of time so that services never read a wall
// clock directly.
class Network {
 public:
  virtual ~Network() = default;

  // Synchronous request/response. Transport failures surface as
  // Error(TransportError); protocol-level errors come back in the response.
  virtual Message call(const Address& from, const Address& to, const Message& request) = 0;

  virtual std::int64_t now_us() const = 0;
  virtual void sleep_us(std::int64_t duration) = 0;

  // Runs the tasks as concurrent activities that all start at now_us().
  // Returns each task's completion time. Afterwards the clock reads the start
  // time again (simulator) and the caller decides which completion to join on
  // through advance_to().
  virtual std::vector<std::int64_t> run_concurrently(std::vector<std::function<void()>> tasks) = 0;
  virtual void advance_to(std::int64_t t_us) = 0;

  std::int64_t now_s() const { return now_us() / 1'000'000; }
};

struct Reply {
  json value;
  std::string data;
};

// Performs one call and unwraps the response, throwing the remote Error.
Reply rpc(Network& net, const Address& from, const Address& to, std::string_view op, json args,
          std::string_view auth, std::string data = {});

// Op-name dispatch table that converts thrown Errors into error responses.
class Dispatcher : public Service {
 public:
  using Handler = std::function<Message(const Address& caller, const Message& request)>;

  void on(std::string op, Handler handler);
  Message handle(const Address& caller, const Message& request) override;

 private:
  std::map<std::string, Handler, std::less<>> handlers_;
};

}  // namespace gridfs::wire
