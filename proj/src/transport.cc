/*
 * Copyright 2026 The DRF Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "drf/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace drf {

std::vector<std::uint8_t> serve_frame(Service& service, std::span<const std::uint8_t> frame) {
  Envelope request;
  try {
    request = decode_frame(frame);
  } catch (const Error& e) {
    return encode_frame(error_envelope(Envelope{}, e.code(), e.what()));
  }
  try {
    return encode_frame(service.handle(request));
  } catch (const Error& e) {
    return encode_frame(error_envelope(request, e.code(), e.what()));
  } catch (const std::exception& e) {
    return encode_frame(error_envelope(request, Errc::kInvalidArgument, e.what()));
  }
}

std::vector<std::uint8_t> InProcessChannel::exchange(std::span<const std::uint8_t> frame) {
  bytes_sent_ += frame.size();
  auto reply = serve_frame(service_, frame);
  bytes_received_ += reply.size();
  return reply;
}

std::vector<std::uint8_t> FlakyChannel::exchange(std::span<const std::uint8_t> frame) {
  auto reply = inner_.exchange(frame);
  bytes_sent_ += frame.size();
  if (drop_every_ != 0 && ++calls_ % drop_every_ == 0) {
    ++dropped_;
    throw Error(Errc::kTimeout, "reply dropped by " + describe());
  }
  bytes_received_ += reply.size();
  return reply;
}

std::vector<std::uint8_t> DeadChannel::exchange(std::span<const std::uint8_t>) {
  throw Error(Errc::kTimeout, name_ + " does not answer");
}

// ---------------------------------------------------------------------------
// Sockets.

namespace {

bool write_all(int fd, const std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t k = ::send(fd, data, size, MSG_NOSIGNAL);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    data += k;
    size -= static_cast<std::size_t>(k);
  }
  return true;
}

bool read_all(int fd, std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t k = ::recv(fd, data, size, 0);
    if (k < 0 && errno == EINTR) continue;
    if (k <= 0) return false;
    data += k;
    size -= static_cast<std::size_t>(k);
  }
  return true;
}

// Reads one frame; empty on EOF or error.
std::vector<std::uint8_t> read_frame(int fd) {
  std::vector<std::uint8_t> frame(kFrameHeaderBytes);
  if (!read_all(fd, frame.data(), frame.size())) return {};
  const std::uint64_t length = frame_body_length(frame);
  if (length > (1ull << 36)) throw Error(Errc::kProtocolDesync, "frame too large");
  frame.resize(kFrameHeaderBytes + length);
  if (!read_all(fd, frame.data() + kFrameHeaderBytes, length)) return {};
  return frame;
}

void set_timeout(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

}  // namespace

SocketChannel::SocketChannel(std::string host, std::uint16_t port, std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

SocketChannel::~SocketChannel() {
  std::lock_guard lock(mu_);
  close_locked();
}

std::string SocketChannel::describe() const { return host_ + ":" + std::to_string(port_); }

void SocketChannel::close_locked() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void SocketChannel::connect_locked() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port_);
  if (::getaddrinfo(host_.c_str(), service.c_str(), &hints, &res) != 0) {
    throw Error(Errc::kTimeout, "cannot resolve " + describe());
  }
  int fd = -1;
  for (addrinfo* a = res; a != nullptr; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    set_timeout(fd, timeout_);
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(Errc::kTimeout, "cannot connect to " + describe());
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  fd_ = fd;
}

std::vector<std::uint8_t> SocketChannel::exchange(std::span<const std::uint8_t> frame) {
  std::lock_guard lock(mu_);
  if (fd_ < 0) connect_locked();
  if (!write_all(fd_, frame.data(), frame.size())) {
    close_locked();
    throw Error(Errc::kTimeout, "send to " + describe() + " failed");
  }
  bytes_sent_ += frame.size();
  std::vector<std::uint8_t> reply;
  try {
    reply = read_frame(fd_);
  } catch (...) {
    close_locked();
    throw;
  }
  if (reply.empty()) {
    close_locked();
    throw Error(Errc::kTimeout, "no reply from " + describe());
  }
  bytes_received_ += reply.size();
  return reply;
}

SocketServer::SocketServer(Service& service, std::uint16_t port, const std::string& bind_host)
    : service_(service) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(Errc::kIoFailure, "socket: " + std::string(std::strerror(errno)));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw Error(Errc::kInvalidArgument, "bad bind address " + bind_host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw Error(Errc::kIoFailure, "cannot listen on port " + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

SocketServer::~SocketServer() { stop(); }

void SocketServer::accept_loop() {
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    connections_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void SocketServer::serve_connection(int fd) {
  try {
    for (;;) {
      auto frame = read_frame(fd);
      if (frame.empty()) break;
      auto reply = serve_frame(service_, frame);
      if (!write_all(fd, reply.data(), reply.size())) break;
    }
  } catch (const Error&) {
    // Garbled stream: drop the connection.
  }
  ::shutdown(fd, SHUT_RDWR);
}

void SocketServer::stop() {
  if (stopping_.exchange(true)) {
    if (acceptor_.joinable()) acceptor_.join();
    return;
  }
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::list<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : connections_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  std::lock_guard lock(mu_);
  for (int fd : connections_) ::close(fd);
  connections_.clear();
}

void SocketServer::wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

// ---------------------------------------------------------------------------

Envelope roundtrip(Channel& channel, const Envelope& request, MsgKind expected,
                   const RetryPolicy& policy, std::atomic<std::uint64_t>* retries) {
  const auto frame = encode_frame(request);
  auto backoff = policy.initial_backoff;
  std::string last_failure;
  for (std::uint32_t attempt = 0; attempt < policy.max_attempts; ++attempt) {
    if (attempt > 0) {
      if (retries) ++*retries;
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<std::int64_t>(static_cast<double>(backoff.count()) * policy.multiplier) + 1);
    }
    std::vector<std::uint8_t> reply_frame;
    try {
      reply_frame = channel.exchange(frame);
    } catch (const Error& e) {
      if (e.code() != Errc::kTimeout && e.code() != Errc::kIoFailure) throw;
      last_failure = e.what();
      continue;
    }
    Envelope reply = decode_frame(reply_frame);
    if (reply.kind == MsgKind::kError) raise_error_envelope(reply);
    if (reply.kind != expected || reply.tree != request.tree || reply.depth != request.depth) {
      throw Error(Errc::kProtocolDesync,
                  channel.describe() + " answered " + std::string(msg_kind_name(reply.kind)) +
                      " (tree " + std::to_string(reply.tree) + ", depth " +
                      std::to_string(reply.depth) + ") to " +
                      std::string(msg_kind_name(request.kind)) + " (tree " +
                      std::to_string(request.tree) + ", depth " + std::to_string(request.depth) +
                      ")");
    }
    return reply;
  }
  throw Error(Errc::kSplitterUnreachable,
              channel.describe() + " after " + std::to_string(policy.max_attempts) +
                  " attempts: " + last_failure);
}

}  // namespace drf
