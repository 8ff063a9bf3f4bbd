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

#ifndef DRF_TRANSPORT_H_
#define DRF_TRANSPORT_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "drf/protocol.h"

namespace drf {

// Request handler behind an endpoint.
class Service {
 public:
  virtual ~Service() = default;
  virtual Envelope handle(const Envelope& request) = 0;
};

// Decodes a frame, runs the service and encodes its reply; module errors
// become kError replies.
std::vector<std::uint8_t> serve_frame(Service& service, std::span<const std::uint8_t> frame);

// Ordered request/reply link to one endpoint. Transport failures throw
// Error(kTimeout).
class Channel {
 public:
  virtual ~Channel() = default;
  virtual std::vector<std::uint8_t> exchange(std::span<const std::uint8_t> frame) = 0;
  virtual std::string describe() const = 0;

  std::uint64_t bytes_sent() const { return bytes_sent_; }
  std::uint64_t bytes_received() const { return bytes_received_; }

 protected:
  std::atomic<std::uint64_t> bytes_sent_{0};
  std::atomic<std::uint64_t> bytes_received_{0};
};

// Calls the service directly, still passing through the frame codec.
class InProcessChannel : public Channel {
 public:
  InProcessChannel(Service& service, std::string name) : service_(service), name_(std::move(name)) {}
  std::vector<std::uint8_t> exchange(std::span<const std::uint8_t> frame) override;
  std::string describe() const override { return name_; }

 private:
  Service& service_;
  std::string name_;
};

// Length-prefixed frames over TCP. One connection, opened lazily and
// reopened after a failure.
class SocketChannel : public Channel {
 public:
  SocketChannel(std::string host, std::uint16_t port,
                std::chrono::milliseconds timeout = std::chrono::seconds(60));
  ~SocketChannel() override;
  std::vector<std::uint8_t> exchange(std::span<const std::uint8_t> frame) override;
  std::string describe() const override;

 private:
  void connect_locked();
  void close_locked();

  std::string host_;
  std::uint16_t port_;
  std::chrono::milliseconds timeout_;
  std::mutex mu_;
  int fd_ = -1;
};

// Accepts connections and serves each on its own thread.
class SocketServer {
 public:
  // Port 0 picks a free port.
  SocketServer(Service& service, std::uint16_t port = 0, const std::string& bind_host = "127.0.0.1");
  ~SocketServer();
  std::uint16_t port() const { return port_; }
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();

 private:
  void accept_loop();
  void serve_connection(int fd);

  Service& service_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<int> connections_;
  std::list<std::thread> workers_;
};

// Fault injection: the wrapped request is delivered but every
// `drop_every`-th reply is lost.
class FlakyChannel : public Channel {
 public:
  FlakyChannel(Channel& inner, std::uint32_t drop_every) : inner_(inner), drop_every_(drop_every) {}
  std::vector<std::uint8_t> exchange(std::span<const std::uint8_t> frame) override;
  std::string describe() const override { return "flaky(" + inner_.describe() + ")"; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  Channel& inner_;
  std::uint32_t drop_every_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> dropped_{0};
};

// Endpoint that never answers.
class DeadChannel : public Channel {
 public:
  explicit DeadChannel(std::string name) : name_(std::move(name)) {}
  std::vector<std::uint8_t> exchange(std::span<const std::uint8_t>) override;
  std::string describe() const override { return name_; }

 private:
  std::string name_;
};

struct RetryPolicy {
  std::uint32_t max_attempts = 4;
  std::chrono::milliseconds initial_backoff{2};
  double multiplier = 2.0;
};

// Sends `request` and returns the reply of kind `expected`. Transport
// failures are retried with exponential backoff, then surface as
// SplitterUnreachable. Error replies are rethrown; a reply for another
// (tree, depth) is a ProtocolDesync.
Envelope roundtrip(Channel& channel, const Envelope& request, MsgKind expected,
                   const RetryPolicy& policy = {}, std::atomic<std::uint64_t>* retries = nullptr);

}  // namespace drf

#endif  // DRF_TRANSPORT_H_
