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

#include "cdasr/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

namespace cdasr {

namespace {

constexpr double kToneHz = 200.0;
constexpr double kDitherSigma = 1e-4;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void CorpusSpec::validate(const ToyModelSpec& model) const {
  if (!(silence_fraction >= 0.0 && silence_fraction <= 1.0)) {
    throw std::invalid_argument("silence_fraction must be in [0, 1]");
  }
  if (std::fabs(model.frame_s - 1.0) > 1e-12) {
    throw std::invalid_argument("corpus generation assumes 1 s frames");
  }
  if (!content_weights.empty()) {
    if (content_weights.size() != static_cast<std::size_t>(model.content_count)) {
      throw std::invalid_argument("content_weights needs one weight per content token");
    }
    double total = 0.0;
    for (double w : content_weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("negative content weight");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("content weights sum to zero");
  }
  if (!(room_tone_rms >= 0.0 && room_tone_rms < model.silence_rms)) {
    throw std::invalid_argument("room tone must stay below the silence threshold");
  }
}

Waveform render_frames(std::span<const TokenId> frames, const ToyModelSpec& model,
                       std::uint64_t seed, double room_tone_rms) {
  const auto frame_len =
      static_cast<std::size_t>(std::llround(model.frame_s * model.sample_rate));
  Waveform w;
  w.sample_rate = model.sample_rate;
  w.samples.reserve(frames.size() * frame_len);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> unit(0.0, 1.0);

  std::vector<double> tone(frame_len);
  for (TokenId tok : frames) {
    if (tok == kSilentFrame) {
      for (std::size_t i = 0; i < frame_len; ++i) {
        w.samples.push_back(static_cast<float>(room_tone_rms * unit(rng)));
      }
      continue;
    }
    if (tok < model.first_content || tok >= model.first_content + model.content_count) {
      throw std::invalid_argument("frame token " + std::to_string(tok) +
                                  " is not a content token");
    }
    // Scale a random-phase tone so its mean magnitude is exactly the code.
    const double phase = phase_dist(rng);
    double abs_mean = 0.0;
    for (std::size_t i = 0; i < frame_len; ++i) {
      tone[i] = std::sin(2.0 * std::numbers::pi * kToneHz * static_cast<double>(i) /
                             model.sample_rate +
                         phase);
      abs_mean += std::fabs(tone[i]);
    }
    abs_mean /= static_cast<double>(frame_len);
    const double gain = content_amplitude(tok, model) / abs_mean;
    for (std::size_t i = 0; i < frame_len; ++i) {
      w.samples.push_back(static_cast<float>(gain * tone[i] + kDitherSigma * unit(rng)));
    }
  }
  return w;
}

CorpusFile make_corpus_file(const CorpusSpec& spec, const ToyModelSpec& model,
                            std::size_t index) {
  spec.validate(model);
  std::mt19937_64 rng(spec.seed + 7919 * static_cast<std::uint64_t>(index));

  const std::size_t total = spec.duration_s;
  const auto silent = static_cast<std::size_t>(
      std::llround(spec.silence_fraction * static_cast<double>(total)));
  const std::size_t voiced = total - silent;

  // Split the silent frames into blocks and drop each block into a distinct
  // gap between voiced frames so blocks never merge.
  std::size_t blocks = silent == 0 ? 0 : std::min({spec.silence_blocks, silent, voiced + 1});
  if (silent > 0 && blocks == 0) blocks = 1;
  std::vector<std::size_t> block_len(blocks, blocks ? silent / blocks : 0);
  for (std::size_t b = 0; b < (blocks ? silent % blocks : 0); ++b) ++block_len[b];
  std::vector<std::size_t> gaps(voiced + 1);
  for (std::size_t g = 0; g <= voiced; ++g) gaps[g] = g;
  std::shuffle(gaps.begin(), gaps.end(), rng);
  gaps.resize(blocks);
  std::sort(gaps.begin(), gaps.end());

  std::vector<double> weights = spec.content_weights;
  if (weights.empty()) weights.assign(static_cast<std::size_t>(model.content_count), 1.0);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());

  CorpusFile file;
  std::size_t next_block = 0;
  const auto emit_blocks_at = [&](std::size_t gap) {
    while (next_block < blocks && gaps[next_block] == gap) {
      const double start = static_cast<double>(file.frames.size());
      file.frames.insert(file.frames.end(), block_len[next_block], kSilentFrame);
      file.silence_spans.push_back({start, static_cast<double>(file.frames.size())});
      ++next_block;
    }
  };
  std::vector<std::string> words;
  for (std::size_t v = 0; v < voiced; ++v) {
    emit_blocks_at(v);
    const TokenId tok = model.first_content + pick(rng);
    file.frames.push_back(tok);
    words.push_back(model.token_text[static_cast<std::size_t>(tok)]);
  }
  emit_blocks_at(voiced);

  for (const auto& word : words) {
    if (!file.reference.empty()) file.reference += ' ';
    file.reference += word;
  }
  file.audio = render_frames(file.frames, model, rng(), spec.room_tone_rms);
  return file;
}

std::vector<ManifestEntry> generate(const CorpusSpec& spec,
                                    const std::filesystem::path& out_dir,
                                    const ToyModelSpec& model) {
  std::filesystem::create_directories(out_dir);
  std::vector<ManifestEntry> manifest;
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.n_files; ++i) {
    const CorpusFile file = make_corpus_file(spec, model, i);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "file_%03zu", i);
    const std::string s(stem);

    ManifestEntry entry{s + ".wav", s + ".ref.txt", file.silence_spans};
    save_waveform(out_dir / entry.audio, file.audio);
    write_text(out_dir / entry.ref, file.reference + "\n");
    write_text(out_dir / (s + ".spans.json"), spans_json(file.silence_spans).dump() + "\n");

    j.push_back({{"audio", entry.audio.string()},
                 {"ref", entry.ref.string()},
                 {"silence_spans", spans_json(entry.silence_spans)}});
    manifest.push_back(std::move(entry));
  }
  write_text(out_dir / "manifest.json", j.dump(2) + "\n");
  return manifest;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed manifest " + path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw std::runtime_error("manifest must be a JSON array");
  const auto base = path.parent_path();
  std::vector<ManifestEntry> out;
  for (const auto& item : j) {
    ManifestEntry e;
    e.audio = item.at("audio").get<std::string>();
    e.ref = item.at("ref").get<std::string>();
    if (e.audio.is_relative()) e.audio = base / e.audio;
    if (e.ref.is_relative()) e.ref = base / e.ref;
    if (item.contains("silence_spans")) e.silence_spans = parse_spans(item["silence_spans"]);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<SilenceSpan> parse_spans(const nlohmann::json& j) {
  std::vector<SilenceSpan> spans;
  for (const auto& s : j) {
    if (!s.is_array() || s.size() != 2) {
      throw std::runtime_error("silence span must be [start_s, end_s]");
    }
    spans.push_back({s[0].get<double>(), s[1].get<double>()});
  }
  return spans;
}

nlohmann::json spans_json(std::span<const SilenceSpan> spans) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : spans) j.push_back({s.start_s, s.end_s});
  return j;
}

}  // namespace cdasr
