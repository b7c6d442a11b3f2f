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

#ifndef CDASR_SYNTH_H_
#define CDASR_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cdasr/audio.h"
#include "cdasr/eval.h"
#include "cdasr/toy_backend.h"

namespace cdasr {

// Frame plan entry for a silent (room tone) frame.
inline constexpr TokenId kSilentFrame = -1;

struct CorpusSpec {
  std::size_t n_files = 10;
  std::size_t duration_s = 120;
  // Relative weights of the content tokens; empty means uniform.
  std::vector<double> content_weights;
  double silence_fraction = 0.2;
  // Silence is laid out in at most this many contiguous blocks per file.
  std::size_t silence_blocks = 2;
  // RMS of the low-level noise filling silent frames.
  double room_tone_rms = 0.002;
  std::uint64_t seed = 20260301;

  void validate(const ToyModelSpec& model) const;
};

struct ManifestEntry {
  std::filesystem::path audio;
  std::filesystem::path ref;
  std::vector<SilenceSpan> silence_spans;
};

struct CorpusFile {
  Waveform audio;
  std::vector<TokenId> frames;  // one entry per frame, kSilentFrame for silence
  std::string reference;
  std::vector<SilenceSpan> silence_spans;
};

// Renders one frame per entry of `frames`: content tokens are amplitude
// coded for the toy model, kSilentFrame becomes room tone.
Waveform render_frames(std::span<const TokenId> frames, const ToyModelSpec& model,
                       std::uint64_t seed, double room_tone_rms = 0.002);

// Draws the frame plan and audio of file `index` of the corpus.
CorpusFile make_corpus_file(const CorpusSpec& spec, const ToyModelSpec& model,
                            std::size_t index);

// Writes <stem>.wav, <stem>.ref.txt and <stem>.spans.json per file plus
// manifest.json into out_dir. Paths in the manifest are relative to out_dir.
std::vector<ManifestEntry> generate(const CorpusSpec& spec,
                                    const std::filesystem::path& out_dir,
                                    const ToyModelSpec& model = {});

// Reads a manifest; relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

std::vector<SilenceSpan> parse_spans(const nlohmann::json& j);
nlohmann::json spans_json(std::span<const SilenceSpan> spans);

}  // namespace cdasr

#endif  // CDASR_SYNTH_H_
