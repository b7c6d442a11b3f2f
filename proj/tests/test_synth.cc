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

#include <gtest/gtest.h>

#include "cdasr/eval.h"
#include "cdasr/longform.h"
#include "cdasr/synth.h"
#include "test_util.h"

namespace cdasr {
namespace {

const ToyModelSpec kSpec;

TEST(Synth, VoicedOnlyFile) {
  CorpusSpec spec;
  spec.n_files = 1;
  spec.duration_s = 90;
  spec.silence_fraction = 0.0;
  const CorpusFile f = make_corpus_file(spec, kSpec, 0);
  EXPECT_EQ(f.audio.size(), 90u * 16000u);
  EXPECT_EQ(split_words(f.reference).size(), 90u);
  EXPECT_TRUE(f.silence_spans.empty());
}

TEST(Synth, AllSilence) {
  CorpusSpec spec;
  spec.duration_s = 20;
  spec.silence_fraction = 1.0;
  const CorpusFile f = make_corpus_file(spec, kSpec, 0);
  EXPECT_TRUE(split_words(f.reference).empty());
  ASSERT_EQ(f.silence_spans.size(), 1u);
  EXPECT_DOUBLE_EQ(f.silence_spans[0].start_s, 0.0);
  EXPECT_DOUBLE_EQ(f.silence_spans[0].end_s, 20.0);
}

TEST(Synth, DefaultLayout) {
  const CorpusSpec spec;
  for (std::size_t i = 0; i < spec.n_files; ++i) {
    const CorpusFile f = make_corpus_file(spec, kSpec, i);
    EXPECT_EQ(f.frames.size(), 120u);
    EXPECT_EQ(std::count(f.frames.begin(), f.frames.end(), kSilentFrame), 24);
    EXPECT_LE(f.silence_spans.size(), 2u);
    double covered = 0.0;
    for (const auto& s : f.silence_spans) {
      covered += s.end_s - s.start_s;
      for (double t = s.start_s; t < s.end_s; t += 1.0) {
        EXPECT_EQ(f.frames[static_cast<std::size_t>(t)], kSilentFrame);
      }
    }
    EXPECT_DOUBLE_EQ(covered, 24.0);
  }
}

TEST(Synth, InvalidSpec) {
  CorpusSpec spec;
  spec.silence_fraction = 1.5;
  EXPECT_THROW(make_corpus_file(spec, kSpec, 0), std::invalid_argument);
  spec = {};
  spec.content_weights = {1.0};
  EXPECT_THROW(make_corpus_file(spec, kSpec, 0), std::invalid_argument);
  spec = {};
  spec.room_tone_rms = 0.05;
  EXPECT_THROW(make_corpus_file(spec, kSpec, 0), std::invalid_argument);
}

TEST(Synth, GenerateIsByteDeterministic) {
  testing::TempDir a, b;
  CorpusSpec spec;
  spec.n_files = 2;
  spec.duration_s = 30;
  const auto ma = generate(spec, a.path());
  generate(spec, b.path());
  ASSERT_EQ(ma.size(), 2u);
  for (const char* name : {"manifest.json", "file_000.wav", "file_001.ref.txt",
                           "file_001.spans.json"}) {
    EXPECT_EQ(testing::slurp(a / name), testing::slurp(b / name)) << name;
  }
  EXPECT_EQ(ma[0].audio, "file_000.wav");
  const auto loaded = load_manifest(a / "manifest.json");
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[1].audio, a.path() / "file_001.wav");
  EXPECT_EQ(loaded[0].silence_spans.size(), ma[0].silence_spans.size());
  spec.seed += 1;
  testing::TempDir c;
  generate(spec, c.path());
  EXPECT_NE(testing::slurp(a / "file_000.wav"), testing::slurp(c / "file_000.wav"));
}

TEST(Synth, ManifestErrors) {
  testing::TempDir d;
  EXPECT_THROW(load_manifest(d / "none.json"), std::runtime_error);
  std::ofstream(d / "bad.json") << "{not json";
  EXPECT_THROW(load_manifest(d / "bad.json"), std::runtime_error);
}

TEST(Synth, VoicedOnlyDecodesExactlyAtAlphaZero) {
  CorpusSpec spec;
  spec.duration_s = 75;
  spec.silence_fraction = 0.0;
  ToyBackend b;
  DecodeConfig cfg;
  cfg.alpha = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const CorpusFile f = make_corpus_file(spec, kSpec, i);
    const auto r = transcribe(f.audio, PerturbationSet::defaults(), cfg, {}, b);
    EXPECT_EQ(r.full_text, f.reference);
    EXPECT_DOUBLE_EQ(word_error_rate(f.reference, r.full_text).wer, 0.0);
  }
}

TEST(Synth, WavRoundTripPreservesFrameCoding) {
  testing::TempDir d;
  CorpusSpec spec;
  spec.n_files = 1;
  spec.duration_s = 40;
  const auto m = generate(spec, d.path());
  const CorpusFile f = make_corpus_file(spec, kSpec, 0);
  ToyBackend b;
  const auto frames = b.frames_of(load_waveform(d.path() / m[0].audio));
  ASSERT_EQ(frames.size(), f.frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (f.frames[i] == kSilentFrame) {
      EXPECT_EQ(frames[i].kind, ToyFrame::Kind::kSilent);
    } else {
      EXPECT_EQ(frames[i].token, f.frames[i]);
    }
  }
}

}  // namespace
}  // namespace cdasr
