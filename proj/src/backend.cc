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

#include "cdasr/backend.h"

namespace cdasr {

std::string Vocab::text(TokenId id) const {
  if (id >= 0 && static_cast<std::size_t>(id) < token_text.size()) {
    return token_text[static_cast<std::size_t>(id)];
  }
  return "<" + std::to_string(id) + ">";
}

std::string Vocab::detokenize(std::span<const TokenId> tokens) const {
  std::string out;
  for (TokenId t : tokens) {
    if (is_special(t)) continue;
    if (!out.empty()) out += ' ';
    out += text(t);
  }
  return out;
}

void Vocab::validate() const {
  if (size == 0) throw BackendError("empty vocabulary");
  const auto in_range = [&](TokenId id) {
    return id >= 0 && static_cast<std::size_t>(id) < size;
  };
  if (!in_range(bos) || !in_range(eos)) {
    throw BackendError("bos/eos outside vocabulary");
  }
  if (bos == eos) throw BackendError("bos and eos must differ");
  if (!token_text.empty() && token_text.size() != size) {
    throw BackendError("token_text size does not match vocabulary size");
  }
}

void check_batch(std::span<const Waveform> waveforms, int expected_rate) {
  if (waveforms.empty()) throw BackendError("encode needs at least one path");
  for (const auto& w : waveforms) {
    if (w.sample_rate != expected_rate) {
      throw BackendError("rate mismatch: got " + std::to_string(w.sample_rate) +
                         " Hz, backend expects " +
                         std::to_string(expected_rate) + " Hz");
    }
    if (w.size() != waveforms.front().size()) {
      throw BackendError("paths have mismatched sample counts");
    }
  }
}

ScopedEncoderState::~ScopedEncoderState() {
  try {
    backend_->release(state_);
  } catch (const std::exception&) {
    // Releasing on a dead connection is not actionable here.
  }
}

}  // namespace cdasr
