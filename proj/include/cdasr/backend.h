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

#ifndef CDASR_BACKEND_H_
#define CDASR_BACKEND_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdasr/audio.h"

namespace cdasr {

using TokenId = std::int32_t;

// Scores over the vocabulary for one path at one decoding step.
using LogitVector = std::vector<float>;

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vocab {
  std::size_t size = 0;
  TokenId bos = 0;
  TokenId eos = 1;
  // Optional; ids without an entry render as "<id>".
  std::vector<std::string> token_text;

  bool is_special(TokenId id) const { return id == bos || id == eos; }
  std::string text(TokenId id) const;
  // Space-joined text of the non-special tokens.
  std::string detokenize(std::span<const TokenId> tokens) const;
  void validate() const;
};

// Handle to the encoded clean + perturbed paths of one segment.
struct EncoderState {
  std::string handle;
  std::size_t path_count = 0;
};

// Logits for every encoded path under one shared prefix.
struct StepLogits {
  LogitVector positive;
  std::vector<LogitVector> negatives;
};

// The model boundary: encode all paths of a segment in one batched request,
// then score decoder prefixes against every path at once.
//
// A backend instance serves one transcription job at a time.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const Vocab& vocab() const = 0;
  virtual int sample_rate() const = 0;
  // Maximum prefix length accepted by decode_step().
  virtual std::size_t context_limit() const = 0;

  // waveforms[0] is the clean path. All paths must share length and rate.
  virtual EncoderState encode_batch(std::span<const Waveform> waveforms) = 0;
  virtual StepLogits decode_step(const EncoderState& state,
                                 std::span<const TokenId> prefix) = 0;
  virtual void release(const EncoderState& state) = 0;
};

// Checks the encode_batch() preconditions shared by all backends.
void check_batch(std::span<const Waveform> waveforms, int expected_rate);

// Releases an encoder state when it goes out of scope.
class ScopedEncoderState {
 public:
  ScopedEncoderState(Backend& backend, EncoderState state)
      : backend_(&backend), state_(std::move(state)) {}
  ~ScopedEncoderState();
  ScopedEncoderState(const ScopedEncoderState&) = delete;
  ScopedEncoderState& operator=(const ScopedEncoderState&) = delete;

  const EncoderState& get() const { return state_; }

 private:
  Backend* backend_;
  EncoderState state_;
};

}  // namespace cdasr

#endif  // CDASR_BACKEND_H_
