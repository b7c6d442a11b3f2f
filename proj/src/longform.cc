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

#include "cdasr/longform.h"

#include <chrono>

#include "cdasr/fusion.h"

namespace cdasr {

std::vector<TokenId> next_context(const std::vector<TokenId>& prev,
                                  const Vocab& vocab,
                                  const ContextPolicy& policy) {
  if (!policy.enabled) return {};
  std::vector<TokenId> words;
  words.reserve(prev.size());
  for (TokenId t : prev) {
    if (!vocab.is_special(t)) words.push_back(t);
  }
  if (words.size() > policy.max_context_tokens) {
    words.erase(words.begin(),
                words.end() - static_cast<std::ptrdiff_t>(policy.max_context_tokens));
  }
  return words;
}

PerturbationSet segment_perturbations(const PerturbationSet& pset,
                                      std::uint64_t base_seed,
                                      std::size_t index) {
  return pset.reseeded(base_seed + static_cast<std::uint64_t>(index) * pset.size());
}

TranscriptResult transcribe(const Waveform& w, const PerturbationSet& pset,
                            const DecodeConfig& cfg,
                            const ContextPolicy& policy, Backend& backend,
                            const TranscribeOptions& opts) {
  using Clock = std::chrono::steady_clock;
  w.validate();
  cfg.validate();
  if (w.sample_rate != backend.sample_rate()) {
    throw BackendError("rate mismatch: input is " + std::to_string(w.sample_rate) +
                       " Hz, backend expects " +
                       std::to_string(backend.sample_rate()) + " Hz");
  }
  if (policy.enabled && policy.max_context_tokens >= backend.context_limit()) {
    throw std::invalid_argument("max_context_tokens must be below the backend context limit");
  }

  TranscriptResult result;
  result.audio_duration_s = w.duration_s();
  const Vocab& vocab = backend.vocab();
  std::vector<TokenId> context;

  for (auto& seg : segmentize(w, opts.segment_len_s)) {
    const auto start = Clock::now();
    SegmentRecord rec;
    rec.index = seg.index;
    rec.source_offset_s = seg.source_offset_s;
    Hypothesis hyp;
    try {
      std::vector<Waveform> paths;
      paths.reserve(pset.size() + 1);
      paths.push_back(seg.waveform);
      if (cfg.alpha != 0.0 || !opts.elide_negatives_at_zero_alpha) {
        for (auto& neg : apply_set(seg.waveform,
                                   segment_perturbations(pset, opts.base_seed, seg.index))) {
          paths.push_back(std::move(neg));
        }
      }
      ScopedEncoderState state(backend, backend.encode_batch(paths));
      hyp = decode_segment(backend, state.get(), context, cfg);
    } catch (const BackendError& e) {
      result.complete = false;
      result.error = "segment " + std::to_string(seg.index) + ": " + e.what();
      break;
    } catch (const FusionError& e) {
      result.complete = false;
      result.error = "segment " + std::to_string(seg.index) + ": " + e.what();
      break;
    }
    rec.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();

    if (opts.on_hypothesis) opts.on_hypothesis(seg.index, hyp);
    rec.tokens = hyp.tokens;
    rec.text = vocab.detokenize(hyp.tokens);
    rec.finished = hyp.finished;
    rec.step_count = hyp.tokens.size();

    if (!hyp.finished && policy.clear_on_overflow) {
      context.clear();
    } else {
      context = next_context(hyp.tokens, vocab, policy);
    }

    result.total_tokens += rec.step_count;
    result.total_wall_time_s += rec.wall_time_s;
    if (!rec.text.empty()) {
      if (!result.full_text.empty()) result.full_text += ' ';
      result.full_text += rec.text;
    }
    result.segments.push_back(std::move(rec));
  }
  return result;
}

nlohmann::json to_json(const TranscriptResult& r, bool include_timing) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : r.segments) {
    nlohmann::json j = {{"index", s.index},
                        {"source_offset_s", s.source_offset_s},
                        {"tokens", s.tokens},
                        {"text", s.text},
                        {"finished", s.finished},
                        {"step_count", s.step_count}};
    if (include_timing) j["wall_time_s"] = s.wall_time_s;
    segs.push_back(std::move(j));
  }
  nlohmann::json out = {{"segments", std::move(segs)},
                        {"full_text", r.full_text},
                        {"total_tokens", r.total_tokens},
                        {"audio_duration_s", r.audio_duration_s},
                        {"complete", r.complete}};
  if (!r.complete) out["error"] = r.error;
  if (include_timing) out["total_wall_time_s"] = r.total_wall_time_s;
  return out;
}

nlohmann::json timing_json(const TranscriptResult& r) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : r.segments) {
    segs.push_back({{"index", s.index}, {"wall_time_s", s.wall_time_s}});
  }
  return {{"segments", std::move(segs)},
          {"total_wall_time_s", r.total_wall_time_s},
          {"total_tokens", r.total_tokens},
          {"audio_duration_s", r.audio_duration_s}};
}

}  // namespace cdasr
