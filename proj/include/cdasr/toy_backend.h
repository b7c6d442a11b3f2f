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

#ifndef CDASR_TOY_BACKEND_H_
#define CDASR_TOY_BACKEND_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdasr/backend.h"

namespace cdasr {

// Deterministic stand-in acoustic model.
//
// Audio is read in fixed frames. A frame whose RMS is below `silence_rms` is
// silent; if its RMS is also below `void_rms` it carries no signal at all
// (digital zeros). Any other frame is voiced and names one content token via
// amplitude coding: token = first_content + round(mean|x| * 1000) mod
// content_count.
//
// The decoder keeps a cursor into the frames derived from the prefix: a
// token emitted on a voiced frame consumes that frame; on a silent frame,
// emitting the next voiced frame's token jumps past the silent run, and any
// other token consumes one silent frame. Logits at the cursor start at
// `base_logit` and receive:
//   voiced frame         evidence token += evidence_bonus
//   silent frame         halluc += halluc_bias (+ void_extra_bias with no
//                        signal); the next voiced token += jump_bonus, or
//                        eos += silent_eos_bias if none remains
//   past the last frame  eos += end_eos_bonus
//   always               previous non-special prefix token += 2 * rho;
//                        halluc += min(priming_per_token * n, priming_cap)
//                        for n halluc tokens in the context before bos
struct ToyModelSpec {
  std::vector<std::string> token_text = {
      "<|startoftranscript|>", "<|endoftext|>", "thanks", "you",
      "alpha", "bravo", "charlie", "delta", "echo", "foxtrot",
      "golf", "hotel", "india", "juliet", "kilo", "lima"};
  TokenId bos = 0;
  TokenId eos = 1;
  TokenId halluc = 2;
  TokenId rep_trap = 3;
  TokenId first_content = 4;
  int content_count = 12;

  int sample_rate = 16000;
  double frame_s = 1.0;
  double silence_rms = 0.01;
  double void_rms = 1e-4;

  double base_logit = -4.0;
  double evidence_bonus = 6.0;
  double rho = 1.5;
  double halluc_bias = 5.0;
  double void_extra_bias = 5.0;
  double silent_eos_bias = 3.0;
  double jump_bonus = 4.5;
  double end_eos_bonus = 6.0;
  double priming_per_token = 0.25;
  double priming_cap = 6.0;

  std::size_t context_limit = 448;

  void validate() const;
};

// Frame classification used by the toy model.
struct ToyFrame {
  enum class Kind { kVoiced, kSilent, kVoid } kind = Kind::kSilent;
  TokenId token = -1;  // valid for kVoiced
};

// Classifies one frame of samples under `spec`.
ToyFrame classify_frame(std::span<const float> frame, const ToyModelSpec& spec);

// Mean absolute amplitude that codes content token `token`. The offset keeps
// every coded frame above the silence threshold.
double content_amplitude(TokenId token, const ToyModelSpec& spec);

class ToyBackend : public Backend {
 public:
  explicit ToyBackend(ToyModelSpec spec = {});

  const Vocab& vocab() const override { return vocab_; }
  int sample_rate() const override { return spec_.sample_rate; }
  std::size_t context_limit() const override { return spec_.context_limit; }
  const ToyModelSpec& spec() const { return spec_; }

  EncoderState encode_batch(std::span<const Waveform> waveforms) override;
  StepLogits decode_step(const EncoderState& state,
                         std::span<const TokenId> prefix) override;
  void release(const EncoderState& state) override;

  std::size_t live_states() const { return states_.size(); }

  // Logits of a single path; exposed for tests.
  LogitVector path_logits(std::span<const ToyFrame> frames,
                          std::span<const TokenId> prefix) const;
  std::vector<ToyFrame> frames_of(const Waveform& w) const;

 private:
  struct PathFrames {
    std::vector<ToyFrame> frames;
    // next_voiced[i]: first voiced frame index >= i, or frames.size().
    std::vector<std::size_t> next_voiced;
    // Frames from here on are zero padding after the signal and read as the
    // end of the audio. An all-zero path has no end marker.
    std::size_t end = 0;
  };

  static void index_voiced(PathFrames& path);
  PathFrames analyse(const Waveform& w) const;
  LogitVector logits_for(const PathFrames& path,
                         std::span<const TokenId> prefix) const;

  ToyModelSpec spec_;
  Vocab vocab_;
  std::uint64_t next_handle_ = 1;
  std::map<std::string, std::vector<PathFrames>> states_;
};

}  // namespace cdasr

#endif  // CDASR_TOY_BACKEND_H_
