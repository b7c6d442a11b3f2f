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

#ifndef CDASR_LONGFORM_H_
#define CDASR_LONGFORM_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cdasr/audio.h"
#include "cdasr/backend.h"
#include "cdasr/decoder.h"
#include "cdasr/perturb.h"
#include "json.hpp"

namespace cdasr {

struct ContextPolicy {
  bool enabled = true;
  std::size_t max_context_tokens = 224;
  // Drop the context after a segment that hit the token cap.
  bool clear_on_overflow = false;
};

struct SegmentRecord {
  std::size_t index = 0;
  double source_offset_s = 0.0;
  std::vector<TokenId> tokens;
  std::string text;
  bool finished = false;
  std::size_t step_count = 0;
  double wall_time_s = 0.0;
};

struct TranscriptResult {
  std::vector<SegmentRecord> segments;
  std::string full_text;
  std::size_t total_tokens = 0;
  double total_wall_time_s = 0.0;
  double audio_duration_s = 0.0;
  // False when a backend failure aborted the run; `error` says why.
  bool complete = true;
  std::string error;
};

struct TranscribeOptions {
  double segment_len_s = 30.0;
  std::uint64_t base_seed = 0;
  // At alpha 0 the fused scores equal the positive logits, so the negative
  // paths can be skipped. Disable to exercise the full fusion path.
  bool elide_negatives_at_zero_alpha = true;
  // Called with each finished segment's hypothesis before its tokens become
  // the next segment's context. Used to inject faults in experiments.
  std::function<void(std::size_t index, Hypothesis&)> on_hypothesis;
};

// Tokens passed as context to the segment after one that produced `prev`:
// the last max_context_tokens non-special tokens, or nothing when disabled.
std::vector<TokenId> next_context(const std::vector<TokenId>& prev,
                                  const Vocab& vocab,
                                  const ContextPolicy& policy);

// Negative-path seeds for segment `index`: base_seed + index * K + k.
PerturbationSet segment_perturbations(const PerturbationSet& pset,
                                      std::uint64_t base_seed,
                                      std::size_t index);

// Runs the segment loop over a whole recording. Backend failures stop the
// loop and are reported through `complete`/`error` with the finished
// segments kept.
TranscriptResult transcribe(const Waveform& w, const PerturbationSet& pset,
                            const DecodeConfig& cfg,
                            const ContextPolicy& policy, Backend& backend,
                            const TranscribeOptions& opts = {});

// JSON form of a transcript. Timings are written only when
// `include_timing` is set so that the default output is reproducible.
nlohmann::json to_json(const TranscriptResult& r, bool include_timing = false);
nlohmann::json timing_json(const TranscriptResult& r);

}  // namespace cdasr

#endif  // CDASR_LONGFORM_H_
