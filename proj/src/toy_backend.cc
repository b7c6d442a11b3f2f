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

#include "cdasr/toy_backend.h"

#include <algorithm>
#include <cmath>

namespace cdasr {

namespace {

// Amplitude coding offset in thousandths: the smallest multiple of
// content_count that keeps a coded sine's RMS above twice the threshold.
long coding_offset(const ToyModelSpec& spec) {
  const long n = spec.content_count;
  const auto floor_units = static_cast<long>(std::ceil(spec.silence_rms * 2000.0));
  return n * ((floor_units + n - 1) / n);
}

}  // namespace

void ToyModelSpec::validate() const {
  if (token_text.empty()) throw BackendError("toy spec: empty vocabulary");
  const auto size = static_cast<TokenId>(token_text.size());
  const auto in_range = [&](TokenId id) { return id >= 0 && id < size; };
  if (!in_range(bos) || !in_range(eos) || !in_range(halluc) ||
      !in_range(rep_trap)) {
    throw BackendError("toy spec: special token outside vocabulary");
  }
  if (bos == eos) throw BackendError("toy spec: bos and eos must differ");
  if (content_count <= 0 || first_content < 0 ||
      first_content + content_count > size) {
    throw BackendError("toy spec: content tokens outside vocabulary");
  }
  if (sample_rate <= 0 || !(frame_s > 0.0)) {
    throw BackendError("toy spec: invalid frame geometry");
  }
  if (!(silence_rms > void_rms) || void_rms < 0.0) {
    throw BackendError("toy spec: need 0 <= void_rms < silence_rms");
  }
  if (context_limit == 0) throw BackendError("toy spec: zero context limit");
}

double content_amplitude(TokenId token, const ToyModelSpec& spec) {
  return static_cast<double>(coding_offset(spec) + (token - spec.first_content)) /
         1000.0;
}

ToyFrame classify_frame(std::span<const float> frame, const ToyModelSpec& spec) {
  ToyFrame out;
  if (frame.empty()) {
    out.kind = ToyFrame::Kind::kVoid;
    return out;
  }
  double sq = 0.0, abs_sum = 0.0;
  for (float s : frame) {
    sq += static_cast<double>(s) * s;
    abs_sum += std::fabs(static_cast<double>(s));
  }
  const double n = static_cast<double>(frame.size());
  const double rms = std::sqrt(sq / n);
  if (rms < spec.void_rms) {
    out.kind = ToyFrame::Kind::kVoid;
  } else if (rms < spec.silence_rms) {
    out.kind = ToyFrame::Kind::kSilent;
  } else {
    out.kind = ToyFrame::Kind::kVoiced;
    const long units = std::lround(abs_sum / n * 1000.0);
    out.token = spec.first_content +
                static_cast<TokenId>(units % spec.content_count);
  }
  return out;
}

ToyBackend::ToyBackend(ToyModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  vocab_.size = spec_.token_text.size();
  vocab_.bos = spec_.bos;
  vocab_.eos = spec_.eos;
  vocab_.token_text = spec_.token_text;
  vocab_.validate();
}

std::vector<ToyFrame> ToyBackend::frames_of(const Waveform& w) const {
  return analyse(w).frames;
}

ToyBackend::PathFrames ToyBackend::analyse(const Waveform& w) const {
  PathFrames path;
  const auto frame_len =
      static_cast<std::size_t>(std::llround(spec_.frame_s * w.sample_rate));
  const std::span<const float> all(w.samples);
  for (std::size_t start = 0; start < all.size(); start += frame_len) {
    const std::size_t len = std::min(frame_len, all.size() - start);
    path.frames.push_back(classify_frame(all.subspan(start, len), spec_));
  }
  index_voiced(path);
  return path;
}

void ToyBackend::index_voiced(PathFrames& path) {
  path.next_voiced.assign(path.frames.size() + 1, path.frames.size());
  for (std::size_t i = path.frames.size(); i-- > 0;) {
    path.next_voiced[i] = path.frames[i].kind == ToyFrame::Kind::kVoiced
                              ? i
                              : path.next_voiced[i + 1];
  }
  path.end = path.frames.size();
  while (path.end > 0 && path.frames[path.end - 1].kind == ToyFrame::Kind::kVoid) --path.end;
  if (path.end == 0) path.end = path.frames.size();
  for (auto& v : path.next_voiced) v = std::min(v, path.end);
}

EncoderState ToyBackend::encode_batch(std::span<const Waveform> waveforms) {
  check_batch(waveforms, spec_.sample_rate);
  std::vector<PathFrames> paths;
  paths.reserve(waveforms.size());
  for (const auto& w : waveforms) {
    w.validate();
    paths.push_back(analyse(w));
  }
  EncoderState state;
  state.handle = "toy-" + std::to_string(next_handle_++);
  state.path_count = paths.size();
  states_.emplace(state.handle, std::move(paths));
  return state;
}

StepLogits ToyBackend::decode_step(const EncoderState& state,
                                   std::span<const TokenId> prefix) {
  const auto it = states_.find(state.handle);
  if (it == states_.end()) {
    throw BackendError("stale state '" + state.handle + "'");
  }
  if (prefix.size() > spec_.context_limit) {
    throw BackendError("context overflow: prefix of " +
                       std::to_string(prefix.size()) + " tokens exceeds " +
                       std::to_string(spec_.context_limit));
  }
  for (TokenId t : prefix) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_.size) {
      throw BackendError("prefix token " + std::to_string(t) +
                         " outside vocabulary");
    }
  }
  StepLogits out;
  const auto& paths = it->second;
  out.positive = logits_for(paths.front(), prefix);
  out.negatives.reserve(paths.size() - 1);
  for (std::size_t k = 1; k < paths.size(); ++k) {
    out.negatives.push_back(logits_for(paths[k], prefix));
  }
  return out;
}

void ToyBackend::release(const EncoderState& state) {
  states_.erase(state.handle);
}

LogitVector ToyBackend::path_logits(std::span<const ToyFrame> frames,
                                    std::span<const TokenId> prefix) const {
  PathFrames path;
  path.frames.assign(frames.begin(), frames.end());
  index_voiced(path);
  return logits_for(path, prefix);
}

LogitVector ToyBackend::logits_for(const PathFrames& path,
                                   std::span<const TokenId> prefix) const {
  const std::size_t n = path.end;

  // Split the prefix into context and in-segment tokens at the last bos.
  std::size_t bos_pos = prefix.size();
  for (std::size_t i = prefix.size(); i-- > 0;) {
    if (prefix[i] == spec_.bos) {
      bos_pos = i;
      break;
    }
  }
  const auto context = prefix.first(bos_pos == prefix.size() ? 0 : bos_pos);
  const auto generated =
      bos_pos == prefix.size() ? prefix : prefix.subspan(bos_pos + 1);

  std::size_t cursor = 0;
  for (TokenId tok : generated) {
    if (cursor >= n) break;
    if (path.frames[cursor].kind == ToyFrame::Kind::kVoiced) {
      ++cursor;
      continue;
    }
    const std::size_t next = path.next_voiced[cursor];
    if (next < n && tok == path.frames[next].token) {
      cursor = next + 1;
    } else {
      ++cursor;
    }
  }

  std::vector<double> logits(vocab_.size, spec_.base_logit);
  const auto bump = [&](TokenId id, double v) {
    logits[static_cast<std::size_t>(id)] += v;
  };

  if (cursor >= n) {
    bump(spec_.eos, spec_.end_eos_bonus);
  } else if (path.frames[cursor].kind == ToyFrame::Kind::kVoiced) {
    bump(path.frames[cursor].token, spec_.evidence_bonus);
  } else {
    double halluc = spec_.halluc_bias;
    if (path.frames[cursor].kind == ToyFrame::Kind::kVoid) {
      halluc += spec_.void_extra_bias;
    }
    bump(spec_.halluc, halluc);
    const std::size_t next = path.next_voiced[cursor];
    if (next < n) {
      bump(path.frames[next].token, spec_.jump_bonus);
    } else {
      bump(spec_.eos, spec_.silent_eos_bias);
    }
  }

  for (std::size_t i = prefix.size(); i-- > 0;) {
    if (prefix[i] == spec_.bos || prefix[i] == spec_.eos) continue;
    bump(prefix[i], 2.0 * spec_.rho);
    break;
  }

  const auto primed = std::count(context.begin(), context.end(), spec_.halluc);
  if (primed > 0) {
    bump(spec_.halluc, std::min(spec_.priming_per_token * static_cast<double>(primed),
                                spec_.priming_cap));
  }

  return LogitVector(logits.begin(), logits.end());
}

}  // namespace cdasr
