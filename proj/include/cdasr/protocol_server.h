// Copyright (c) 2026 The cdasr Authors
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

#ifndef CDASR_PROTOCOL_SERVER_H_
#define CDASR_PROTOCOL_SERVER_H_

#include <atomic>
#include <functional>
#include <thread>

#include "cdasr/backend.h"
#include "json.hpp"

namespace cdasr {

// Maps one protocol request to its reply.
using RequestHandler = std::function<nlohmann::json(const nlohmann::json&)>;

// Serves the line-delimited JSON protocol on top of a local backend.
// Exceptions become {"error": ...} replies.
RequestHandler backend_handler(Backend& backend);

// Loopback TCP server. Connections are served one at a time on a
// background thread, matching the single-consumer backend contract.
class ProtocolServer {
 public:
  // port 0 picks a free port.
  explicit ProtocolServer(RequestHandler handler, int port = 0);
  ~ProtocolServer();
  ProtocolServer(const ProtocolServer&) = delete;
  ProtocolServer& operator=(const ProtocolServer&) = delete;

  int port() const { return port_; }
  std::string endpoint() const { return "127.0.0.1:" + std::to_string(port_); }
  void stop();

 private:
  void serve();
  void serve_connection(int fd);

  RequestHandler handler_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
};

}  // namespace cdasr

#endif  // CDASR_PROTOCOL_SERVER_H_
