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

#include "gridfs/wire/tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <future>

namespace gridfs::wire {
namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

bool send_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

// Reads one complete message; std::nullopt on orderly close or error.
std::optional<std::string> recv_message(int fd) {
  std::string buffer;
  char chunk[64 * 1024];
  for (;;) {
    if (std::size_t n = complete_message_size(buffer); n > 0) {
      buffer.resize(n);
      return buffer;
    }
    ssize_t got = ::recv(fd, chunk, sizeof chunk, 0);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) return std::nullopt;
    buffer.append(chunk, static_cast<std::size_t>(got));
  }
}

int connect_to(const Address& address) {
  auto [host, port] = split_host_port(address);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &result) != 0) {
    fail(Errc::TransportError, "cannot resolve " + address);
  }
  int fd = -1;
  for (auto* ai = result; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    close_fd(fd);
  }
  ::freeaddrinfo(result);
  if (fd < 0) fail(Errc::TransportError, "cannot connect to " + address);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

}  // namespace

std::pair<std::string, std::uint16_t> split_host_port(std::string_view address) {
  auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == address.size()) {
    fail(Errc::InvalidArgument, "expected host:port, got '" + std::string(address) + "'");
  }
  unsigned long port = 0;
  for (char c : address.substr(colon + 1)) {
    if (c < '0' || c > '9') fail(Errc::InvalidArgument, "bad port in '" + std::string(address) + "'");
    port = port * 10 + static_cast<unsigned long>(c - '0');
    if (port > 65535) fail(Errc::InvalidArgument, "port out of range in '" + std::string(address) + "'");
  }
  return {std::string(address.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

TcpNetwork::TcpNetwork() : epoch_(std::chrono::steady_clock::now()) {}

TcpNetwork::~TcpNetwork() {
  std::lock_guard lock(mu_);
  for (auto& [_, conn] : pool_) {
    std::lock_guard conn_lock(conn->mu);
    close_fd(conn->fd);
  }
}

std::shared_ptr<TcpNetwork::Connection> TcpNetwork::connection_for(const Address& to) {
  std::lock_guard lock(mu_);
  auto& slot = pool_[to];
  if (!slot) slot = std::make_shared<Connection>();
  return slot;
}

Message TcpNetwork::call(const Address& /*from*/, const Address& to, const Message& request) {
  auto conn = connection_for(to);
  std::lock_guard lock(conn->mu);
  if (conn->fd < 0) conn->fd = connect_to(to);
  if (!send_all(conn->fd, encode(request))) {
    close_fd(conn->fd);
    fail(Errc::TransportError, "send to " + to + " failed");
  }
  auto reply = recv_message(conn->fd);
  if (!reply) {
    close_fd(conn->fd);
    fail(Errc::TransportError, "connection to " + to + " lost");
  }
  return decode(*reply);
}

std::int64_t TcpNetwork::now_us() const {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - epoch_).count();
}

void TcpNetwork::sleep_us(std::int64_t duration) {
  if (duration > 0) std::this_thread::sleep_for(std::chrono::microseconds(duration));
}

std::vector<std::int64_t> TcpNetwork::run_concurrently(std::vector<std::function<void()>> tasks) {
  std::vector<std::future<std::int64_t>> futures;
  futures.reserve(tasks.size());
  for (auto& task : tasks) {
    futures.push_back(std::async(std::launch::async, [this, t = std::move(task)] {
      t();
      return now_us();
    }));
  }
  std::vector<std::int64_t> done;
  done.reserve(futures.size());
  for (auto& f : futures) done.push_back(f.get());
  return done;
}

void TcpNetwork::advance_to(std::int64_t t_us) { sleep_us(t_us - now_us()); }

TcpServer::TcpServer(Service& service, std::string host, std::uint16_t port)
    : service_(service), host_(std::move(host)), port_(port) {}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) fail(Errc::TransportError, "socket: " + std::string(std::strerror(errno)));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port_);
  if (::inet_pton(AF_INET, host_ == "localhost" ? "127.0.0.1" : host_.c_str(), &addr.sin_addr) != 1) {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 64) != 0) {
    std::string why = std::strerror(errno);
    close_fd(listen_fd_);
    fail(Errc::TransportError, "cannot listen on " + host_ + ":" + std::to_string(port_) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  close_fd(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::list<std::thread> workers;
  {
    std::lock_guard lock(workers_mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.join();
}

void TcpServer::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    std::lock_guard lock(workers_mu_);
    if (!running_) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve(fd); });
  }
}

void TcpServer::serve(int fd) {
  std::string peer = "tcp-peer-" + std::to_string(fd);
  while (running_) {
    auto raw = recv_message(fd);
    if (!raw) break;
    Message response;
    try {
      response = service_.handle(peer, decode(*raw));
    } catch (const Error& e) {
      response = make_error(e);
    }
    if (!send_all(fd, encode(response))) break;
  }
  std::lock_guard lock(workers_mu_);
  client_fds_.remove(fd);
  ::close(fd);
}

}  // namespace gridfs::wire
