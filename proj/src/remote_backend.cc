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

#include "cdasr/remote_backend.h"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace cdasr {

namespace {

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  const auto left =
      std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return left.count() > 0 ? static_cast<int>(left.count()) : 0;
}

}  // namespace

LineSocket::~LineSocket() { close(); }

LineSocket::LineSocket(LineSocket&& other) noexcept
    : fd_(other.fd_), buffer_(std::move(other.buffer_)) {
  other.fd_ = -1;
}

LineSocket& LineSocket::operator=(LineSocket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    buffer_ = std::move(other.buffer_);
    other.fd_ = -1;
  }
  return *this;
}

void LineSocket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  buffer_.clear();
}

LineSocket LineSocket::connect(const std::string& host, int port,
                               std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw BackendError("connection failure: cannot resolve " + host + ": " +
                       ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  const auto deadline = Clock::now() + timeout;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_NONBLOCK, ai->ai_protocol);
    if (fd < 0) {
      last_error = std::strerror(errno);
      continue;
    }
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd p{fd, POLLOUT, 0};
      rc = ::poll(&p, 1, remaining_ms(deadline));
      if (rc == 1) {
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        rc = err == 0 ? 0 : -1;
        if (err != 0) errno = err;
      } else {
        if (rc == 0) errno = ETIMEDOUT;
        rc = -1;
      }
    }
    if (rc == 0) {
      ::freeaddrinfo(res);
      return LineSocket(fd);
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw BackendError("connection failure: " + host + ":" + service + ": " + last_error);
}

void LineSocket::send_line(std::string_view line) {
  if (fd_ < 0) throw BackendError("connection failure: socket closed");
  std::string data(line);
  data.push_back('\n');
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n > 0) {
      sent += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      pollfd p{fd_, POLLOUT, 0};
      ::poll(&p, 1, 1000);
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    const std::string why = n < 0 ? std::strerror(errno) : "peer closed";
    close();
    throw BackendError("connection failure: " + why);
  }
}

bool LineSocket::read_line(std::string& line, std::chrono::milliseconds timeout) {
  if (fd_ < 0) throw BackendError("connection failure: socket closed");
  const auto deadline = Clock::now() + timeout;
  char chunk[65536];
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      line.assign(buffer_, 0, nl);
      buffer_.erase(0, nl + 1);
      return true;
    }
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc == 0) throw BackendError("backend timeout");
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw BackendError(std::string("connection failure: ") + std::strerror(errno));
    }
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n > 0) {
      buffer_.append(chunk, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) {
      if (buffer_.empty()) return false;
      throw BackendError("connection failure: truncated message");
    }
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
    throw BackendError(std::string("connection failure: ") + std::strerror(errno));
  }
}

std::pair<std::string, int> parse_endpoint(std::string_view endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == endpoint.size()) {
    throw std::invalid_argument("endpoint must be host:port, got '" +
                                std::string(endpoint) + "'");
  }
  int port = 0;
  for (char c : endpoint.substr(colon + 1)) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad port in endpoint");
    port = port * 10 + (c - '0');
    if (port > 65535) throw std::invalid_argument("port out of range");
  }
  return {std::string(endpoint.substr(0, colon)), port};
}

RemoteBackend::RemoteBackend(std::string_view endpoint,
                             std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  const auto [host, port] = parse_endpoint(endpoint);
  socket_ = LineSocket::connect(host, port, timeout_);
  const auto hello = call({{"op", "hello"}});
  try {
    vocab_.size = hello.at("vocab_size").get<std::size_t>();
    vocab_.bos = hello.at("bos").get<TokenId>();
    vocab_.eos = hello.at("eos").get<TokenId>();
    sample_rate_ = hello.at("sample_rate").get<int>();
    if (hello.contains("context_limit")) {
      context_limit_ = hello["context_limit"].get<std::size_t>();
    }
    if (hello.contains("token_text")) {
      vocab_.token_text = hello["token_text"].get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed response: hello: ") + e.what());
  }
  vocab_.validate();
  if (sample_rate_ <= 0) throw BackendError("malformed response: bad sample_rate");
}

nlohmann::json RemoteBackend::call(const nlohmann::json& request) {
  if (!socket_.valid()) throw BackendError("connection failure: not connected");
  std::string line;
  try {
    socket_.send_line(request.dump());
    if (!socket_.read_line(line, timeout_)) {
      socket_.close();
      throw BackendError("connection failure: server closed the connection");
    }
  } catch (const BackendError&) {
    // A late reply would desynchronize the stream, so the socket is unusable.
    socket_.close();
    throw;
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed response: ") + e.what());
  }
  if (!reply.is_object()) throw BackendError("malformed response: not an object");
  if (reply.contains("error")) {
    const auto& err = reply["error"];
    throw BackendError("backend error: " + (err.is_string() ? err.get<std::string>() : err.dump()));
  }
  return reply;
}

EncoderState RemoteBackend::encode_batch(std::span<const Waveform> waveforms) {
  check_batch(waveforms, sample_rate_);
  nlohmann::json paths = nlohmann::json::array();
  for (const auto& w : waveforms) paths.push_back(w.samples);
  const auto reply = call({{"op", "encode"}, {"paths", std::move(paths)}});
  if (!reply.contains("state") || !reply["state"].is_string()) {
    throw BackendError("malformed response: encode reply lacks state");
  }
  return {reply["state"].get<std::string>(), waveforms.size()};
}

StepLogits RemoteBackend::decode_step(const EncoderState& state,
                                      std::span<const TokenId> prefix) {
  if (prefix.size() > context_limit_) {
    throw BackendError("context overflow: prefix of " + std::to_string(prefix.size()) +
                       " tokens exceeds " + std::to_string(context_limit_));
  }
  const auto reply = call({{"op", "step"},
                           {"state", state.handle},
                           {"prefix", std::vector<TokenId>(prefix.begin(), prefix.end())}});
  const auto it = reply.find("logits");
  if (it == reply.end() || !it->is_array()) {
    throw BackendError("malformed response: step reply lacks logits");
  }
  if (it->size() != state.path_count) {
    throw BackendError("malformed response: expected " + std::to_string(state.path_count) +
                       " logit rows, got " + std::to_string(it->size()));
  }
  StepLogits out;
  for (std::size_t k = 0; k < it->size(); ++k) {
    const auto& row = (*it)[k];
    if (!row.is_array() || row.size() != vocab_.size) {
      throw BackendError("vocab mismatch: path " + std::to_string(k) + " returned " +
                         std::to_string(row.is_array() ? row.size() : 0) +
                         " logits, vocabulary has " + std::to_string(vocab_.size));
    }
    LogitVector v(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!row[i].is_number()) throw BackendError("malformed response: non-numeric logit");
      v[i] = row[i].get<float>();
      if (!std::isfinite(v[i])) throw BackendError("malformed response: non-finite logit");
    }
    if (k == 0) {
      out.positive = std::move(v);
    } else {
      out.negatives.push_back(std::move(v));
    }
  }
  return out;
}

void RemoteBackend::release(const EncoderState& state) {
  if (!socket_.valid()) return;
  call({{"op", "free"}, {"state", state.handle}});
}

}  // namespace cdasr
