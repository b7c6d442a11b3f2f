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

#ifndef CDASR_REMOTE_BACKEND_H_
#define CDASR_REMOTE_BACKEND_H_

#include <chrono>
#include <string>
#include <string_view>

#include "cdasr/backend.h"
#include "json.hpp"

namespace cdasr {

// Blocking newline-delimited stream socket with per-read timeouts.
class LineSocket {
 public:
  LineSocket() = default;
  explicit LineSocket(int fd) : fd_(fd) {}
  ~LineSocket();
  LineSocket(LineSocket&& other) noexcept;
  LineSocket& operator=(LineSocket&& other) noexcept;
  LineSocket(const LineSocket&) = delete;
  LineSocket& operator=(const LineSocket&) = delete;

  static LineSocket connect(const std::string& host, int port,
                            std::chrono::milliseconds timeout);

  bool valid() const { return fd_ >= 0; }
  void send_line(std::string_view line);
  // Returns false on orderly EOF before any byte of a new line.
  // Throws BackendError("backend timeout") when nothing completes in time.
  bool read_line(std::string& line, std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
  std::string buffer_;
};

// Splits "host:port"; throws std::invalid_argument on malformed input.
std::pair<std::string, int> parse_endpoint(std::string_view endpoint);

// Client for a model server speaking the line-delimited JSON protocol:
//   {"op":"hello"}                          -> {"vocab_size","bos","eos","sample_rate",
//                                               "context_limit"?, "token_text"?}
//   {"op":"encode","paths":[[f32...],...]}  -> {"state":"<id>"}
//   {"op":"step","state":id,"prefix":[ids]} -> {"logits":[[f32...] x paths]}
//   {"op":"free","state":id}                -> {"ok":true}
// Any {"error":msg} reply aborts the current job with a BackendError.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(std::string_view endpoint,
                         std::chrono::milliseconds timeout = std::chrono::seconds(30));

  const Vocab& vocab() const override { return vocab_; }
  int sample_rate() const override { return sample_rate_; }
  std::size_t context_limit() const override { return context_limit_; }

  EncoderState encode_batch(std::span<const Waveform> waveforms) override;
  StepLogits decode_step(const EncoderState& state,
                         std::span<const TokenId> prefix) override;
  void release(const EncoderState& state) override;

 private:
  nlohmann::json call(const nlohmann::json& request);

  LineSocket socket_;
  std::chrono::milliseconds timeout_;
  Vocab vocab_;
  int sample_rate_ = 0;
  std::size_t context_limit_ = 448;
};

}  // namespace cdasr

#endif  // CDASR_REMOTE_BACKEND_H_
