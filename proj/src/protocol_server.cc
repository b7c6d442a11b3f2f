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

#include "cdasr/protocol_server.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <map>

#include "cdasr/remote_backend.h"

namespace cdasr {

RequestHandler backend_handler(Backend& backend) {
  auto states = std::make_shared<std::map<std::string, EncoderState>>();
  return [&backend, states](const nlohmann::json& req) -> nlohmann::json {
    try {
      const std::string op = req.at("op").get<std::string>();
      if (op == "hello") {
        const Vocab& v = backend.vocab();
        nlohmann::json hello = {{"vocab_size", v.size},
                {"bos", v.bos},
                {"eos", v.eos},
                {"sample_rate", backend.sample_rate()},
                {"context_limit", backend.context_limit()}};
        if (!v.token_text.empty()) hello["token_text"] = v.token_text;
        return hello;
      }
      if (op == "encode") {
        std::vector<Waveform> paths;
        for (const auto& p : req.at("paths")) {
          Waveform w;
          w.sample_rate = backend.sample_rate();
          w.samples = p.get<std::vector<float>>();
          paths.push_back(std::move(w));
        }
        EncoderState st = backend.encode_batch(paths);
        (*states)[st.handle] = st;
        return {{"state", st.handle}};
      }
      if (op == "step") {
        const auto it = states->find(req.at("state").get<std::string>());
        if (it == states->end()) return {{"error", "stale state"}};
        const auto prefix = req.at("prefix").get<std::vector<TokenId>>();
        const StepLogits step = backend.decode_step(it->second, prefix);
        nlohmann::json rows = nlohmann::json::array();
        rows.push_back(step.positive);
        for (const auto& n : step.negatives) rows.push_back(n);
        return {{"logits", std::move(rows)}};
      }
      if (op == "free") {
        const auto it = states->find(req.at("state").get<std::string>());
        if (it != states->end()) {
          backend.release(it->second);
          states->erase(it);
        }
        return {{"ok", true}};
      }
      return {{"error", "unknown op '" + op + "'"}};
    } catch (const std::exception& e) {
      return {{"error", e.what()}};
    }
  };
}

ProtocolServer::ProtocolServer(RequestHandler handler, int port)
    : handler_(std::move(handler)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw BackendError(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 4) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw BackendError("cannot listen on port " + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  thread_ = std::thread([this] { serve(); });
}

ProtocolServer::~ProtocolServer() { stop(); }

void ProtocolServer::stop() {
  if (stopping_.exchange(true)) return;
  if (thread_.joinable()) thread_.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

void ProtocolServer::serve() {
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 50) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    serve_connection(fd);
  }
}

void ProtocolServer::serve_connection(int fd) {
  LineSocket sock(fd);
  std::string line;
  while (!stopping_) {
    try {
      if (!sock.read_line(line, std::chrono::milliseconds(50))) return;
    } catch (const BackendError& e) {
      if (std::string_view(e.what()) == "backend timeout") continue;
      return;
    }
    nlohmann::json reply;
    try {
      reply = handler_(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      reply = {{"error", std::string("bad request: ") + e.what()}};
    }
    try {
      sock.send_line(reply.dump());
    } catch (const BackendError&) {
      return;
    }
  }
}

}  // namespace cdasr
