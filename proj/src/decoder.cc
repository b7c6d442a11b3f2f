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

#include "cdasr/decoder.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cdasr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t token_cap(const Backend& backend, std::size_t prefix_len,
                      const DecodeConfig& cfg) {
  const std::size_t limit = backend.context_limit();
  const std::size_t room = limit > prefix_len ? limit - prefix_len : 0;
  if (cfg.max_tokens_per_segment == 0) return room;
  return cfg.max_tokens_per_segment;
}

std::vector<TokenId> make_prefix(std::span<const TokenId> context, TokenId bos,
                                 std::span<const TokenId> generated) {
  std::vector<TokenId> prefix;
  prefix.reserve(context.size() + 1 + generated.size());
  prefix.insert(prefix.end(), context.begin(), context.end());
  prefix.push_back(bos);
  prefix.insert(prefix.end(), generated.begin(), generated.end());
  return prefix;
}

void check_logits(const StepLogits& step, std::size_t vocab_size) {
  if (step.positive.size() != vocab_size) {
    throw BackendError("vocab mismatch: positive path has " +
                       std::to_string(step.positive.size()) + " logits, expected " +
                       std::to_string(vocab_size));
  }
  for (const auto& neg : step.negatives) {
    if (neg.size() != vocab_size) {
      throw BackendError("vocab mismatch: negative path has " +
                         std::to_string(neg.size()) + " logits");
    }
  }
}

Hypothesis decode_greedy(Backend& backend, const EncoderState& state,
                         std::span<const TokenId> context,
                         const DecodeConfig& cfg) {
  const Vocab& vocab = backend.vocab();
  const std::size_t cap = token_cap(backend, context.size() + 1, cfg);
  std::vector<TokenId> prefix = make_prefix(context, vocab.bos, {});
  Hypothesis hyp;
  while (hyp.tokens.size() < cap) {
    const StepLogits step = backend.decode_step(state, prefix);
    check_logits(step, vocab.size);
    FusedLogits fused = fuse_step(step, cfg);
    const TokenId tok = argmax(fused);
    log_softmax(fused);
    hyp.score += fused[static_cast<std::size_t>(tok)];
    hyp.tokens.push_back(tok);
    prefix.push_back(tok);
    if (tok == vocab.eos) {
      hyp.finished = true;
      break;
    }
  }
  return hyp;
}

Hypothesis decode_beam(Backend& backend, const EncoderState& state,
                       std::span<const TokenId> context,
                       const DecodeConfig& cfg) {
  const Vocab& vocab = backend.vocab();
  const std::size_t cap = token_cap(backend, context.size() + 1, cfg);
  std::vector<Hypothesis> beam(1);
  for (std::size_t t = 0; t < cap; ++t) {
    std::vector<FusedLogits> fused(beam.size());
    bool any_open = false;
    for (std::size_t i = 0; i < beam.size(); ++i) {
      if (beam[i].finished) continue;
      any_open = true;
      const auto prefix = make_prefix(context, vocab.bos, beam[i].tokens);
      const StepLogits step = backend.decode_step(state, prefix);
      check_logits(step, vocab.size);
      fused[i] = fuse_step(step, cfg);
    }
    if (!any_open) break;
    beam = beam_select(beam, fused, cfg.beam_width, vocab.eos);
  }
  // Best finished hypothesis, else best unfinished; beam is score-sorted.
  for (const auto& h : beam) {
    if (h.finished) return h;
  }
  return beam.front();
}

}  // namespace

void DecodeConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be finite and >= 0");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("tau must be finite and > 0");
  }
  if (selection == Selection::kBeam && beam_width == 0) {
    throw std::invalid_argument("beam width must be >= 1");
  }
}

FusedLogits fuse_step(const StepLogits& step, const DecodeConfig& cfg) {
  FusedLogits fused;
  if (step.negatives.empty()) {
    fused.assign(step.positive.begin(), step.positive.end());
  } else {
    fused = fuse_multi(step.positive, step.negatives, cfg.alpha, cfg.tau);
  }
  for (TokenId t : cfg.suppress_tokens) {
    if (t >= 0 && static_cast<std::size_t>(t) < fused.size()) {
      fused[static_cast<std::size_t>(t)] = kNegInf;
    }
  }
  return fused;
}

TokenId argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t v = 1; v < scores.size(); ++v) {
    if (scores[v] > scores[best]) best = v;
  }
  return static_cast<TokenId>(best);
}

std::vector<Hypothesis> beam_select(std::span<const Hypothesis> hyps,
                                    std::span<const FusedLogits> fused,
                                    std::size_t width, TokenId eos) {
  if (width == 0) throw std::invalid_argument("beam width must be >= 1");

  struct Candidate {
    double score;
    TokenId token;
    std::size_t parent;
    bool carried;
  };
  std::vector<Candidate> cands;
  std::vector<FusedLogits> normalized(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const Hypothesis& h = hyps[i];
    if (h.finished) {
      cands.push_back({h.score, h.tokens.empty() ? eos : h.tokens.back(), i, true});
      continue;
    }
    if (i >= fused.size()) {
      throw std::invalid_argument("missing fused logits for open hypothesis");
    }
    normalized[i] = fused[i];
    log_softmax(normalized[i]);
    for (std::size_t v = 0; v < normalized[i].size(); ++v) {
      if (normalized[i][v] == kNegInf) continue;
      cands.push_back({h.score + normalized[i][v], static_cast<TokenId>(v), i, false});
    }
  }

  const auto better = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.token != b.token) return a.token < b.token;
    return a.parent < b.parent;
  };
  const std::size_t keep = std::min(width, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep),
                    cands.end(), better);

  std::vector<Hypothesis> out;
  out.reserve(keep);
  for (std::size_t j = 0; j < keep; ++j) {
    const Candidate& c = cands[j];
    if (c.carried) {
      out.push_back(hyps[c.parent]);
      continue;
    }
    Hypothesis h = hyps[c.parent];
    h.tokens.push_back(c.token);
    h.score = c.score;
    h.finished = c.token == eos;
    out.push_back(std::move(h));
  }
  return out;
}

Hypothesis decode_segment(Backend& backend, const EncoderState& state,
                          std::span<const TokenId> context_tokens,
                          const DecodeConfig& cfg) {
  cfg.validate();
  if (cfg.selection == Selection::kBeam) {
    return decode_beam(backend, state, context_tokens, cfg);
  }
  return decode_greedy(backend, state, context_tokens, cfg);
}

}  // namespace cdasr
