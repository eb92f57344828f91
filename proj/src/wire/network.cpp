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

#include "gridfs/wire/network.hpp"

namespace gridfs::wire {

Reply rpc(Network& net, const Address& from, const Address& to, std::string_view op, json args,
          std::string_view auth, std::string data) {
  Message response = net.call(from, to, make_request(op, std::move(args), auth, std::move(data)));
  Reply reply;
  reply.value = expect_ok(response);
  reply.data = std::move(response.data);
  return reply;
}

void Dispatcher::on(std::string op, Handler handler) { handlers_[std::move(op)] = std::move(handler); }

Message Dispatcher::handle(const Address& caller, const Message& request) {
  try {
    const auto& op = op_of(request);
    auto it = handlers_.find(op);
    if (it == handlers_.end()) return make_error(Errc::ProtocolError, "unknown op '" + op + "'");
    return it->second(caller, request);
  } catch (const Error& e) {
    return make_error(e);
  } catch (const json::exception& e) {
    return make_error(Errc::InvalidArgument, e.what());
  } catch (const std::exception& e) {
    return make_error(Errc::BackendFailure, e.what());
  }
}

}  // namespace gridfs::wire
