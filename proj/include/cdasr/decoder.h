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

#ifndef CDASR_DECODER_H_
#define CDASR_DECODER_H_

#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "cdasr/backend.h"
#include "cdasr/fusion.h"

namespace cdasr {

enum class Selection { kGreedy, kBeam };

struct DecodeConfig {
  double alpha = 1.0;
  double tau = 1.0;
  Selection selection = Selection::kGreedy;
  std::size_t beam_width = 5;
  // 0 means "backend context limit minus prefix length".
  std::size_t max_tokens_per_segment = 0;
  std::set<TokenId> suppress_tokens;

  void validate() const;
};

struct Hypothesis {
  // Generated tokens, excluding context and bos; ends with eos if finished.
  std::vector<TokenId> tokens;
  // Sum of the selected tokens' log-softmaxed fused scores.
  double score = 0.0;
  bool finished = false;

  bool operator==(const Hypothesis&) const = default;
};

// Fused logits for one step with suppressed tokens set to -inf. A step
// without negative paths yields the positive logits unchanged.
FusedLogits fuse_step(const StepLogits& step, const DecodeConfig& cfg);

// Lowest-index argmax; entries at -inf are never selected unless all are.
TokenId argmax(std::span<const double> scores);

// One beam step. Unfinished hypotheses are expanded with `fused[i]` (raw
// fused logits; they are log-softmaxed here) and ranked together with the
// finished ones by score. Ties prefer the lower token id, then the lower
// parent index. Returns at most `width` hypotheses. `fused[i]` is ignored for
// finished hypotheses.
std::vector<Hypothesis> beam_select(std::span<const Hypothesis> hyps,
                                    std::span<const FusedLogits> fused,
                                    std::size_t width, TokenId eos);

// Autoregressive decoding of one encoded segment. The prefix is
// context_tokens + bos + generated tokens; every path sees the same prefix.
// Hitting the token cap yields finished == false.
Hypothesis decode_segment(Backend& backend, const EncoderState& state,
                          std::span<const TokenId> context_tokens,
                          const DecodeConfig& cfg);

}  // namespace cdasr

#endif  // CDASR_DECODER_H_
