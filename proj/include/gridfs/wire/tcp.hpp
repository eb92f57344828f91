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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include "gridfs/wire/network.hpp"

namespace gridfs::wire {

// Splits "host:port"; throws Error(InvalidArgument) on malformed input.
std::pair<std::string, std::uint16_t> split_host_port(std::string_view address);

// Network over real TCP sockets with one pooled connection per peer. A
// connection that fails is dropped and re-established on the next call.
class TcpNetwork : public Network {
 public:
  TcpNetwork();
  ~TcpNetwork() override;

  Message call(const Address& from, const Address& to, const Message& request) override;

  std::int64_t now_us() const override;
  void sleep_us(std::int64_t duration) override;
  std::vector<std::int64_t> run_concurrently(std::vector<std::function<void()>> tasks) override;
  void advance_to(std::int64_t t_us) override;

 private:
  struct Connection {
    std::mutex mu;
    int fd = -1;
  };

  std::shared_ptr<Connection> connection_for(const Address& to);

  std::chrono::steady_clock::time_point epoch_;
  std::mutex mu_;
  std::map<Address, std::shared_ptr<Connection>> pool_;
};

// Accepts connections and feeds each framed request to a Service.
class TcpServer {
 public:
  TcpServer(Service& service, std::string host, std::uint16_t port);
  ~TcpServer();

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  void start();
  void stop();
  // Actual bound port (useful when constructed with port 0).
  std::uint16_t port() const noexcept { return port_; }
  Address address() const { return host_ + ":" + std::to_string(port_); }

 private:
  void accept_loop();
  void serve(int fd);

  Service& service_;
  std::string host_;
  std::uint16_t port_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex workers_mu_;
  std::list<std::thread> workers_;
  std::list<int> client_fds_;
};

}  // namespace gridfs::wire
