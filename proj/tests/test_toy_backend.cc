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

#include <algorithm>
#include <random>

#include "cdasr/decoder.h"
#include "cdasr/synth.h"
#include "cdasr/perturb.h"
#include "cdasr/toy_backend.h"
#include "test_util.h"

namespace cdasr {
namespace {

const ToyModelSpec kSpec;

Waveform frames_audio(std::vector<TokenId> frames, double room_tone = 0.002) {
  return render_frames(frames, kSpec, 11, room_tone);
}

TokenId argmax_of(const LogitVector& v) {
  return static_cast<TokenId>(std::max_element(v.begin(), v.end()) - v.begin());
}

TEST(ToyBackend, DefaultVocabulary) {
  ToyBackend b;
  const Vocab& v = b.vocab();
  EXPECT_EQ(v.size, 16u);
  EXPECT_EQ(v.bos, 0);
  EXPECT_EQ(v.eos, 1);
  EXPECT_EQ(v.text(2), "thanks");
  EXPECT_EQ(v.text(4), "alpha");
  EXPECT_EQ(v.text(15), "lima");
  EXPECT_EQ(b.context_limit(), 448u);
  EXPECT_EQ(b.sample_rate(), 16000);
}

TEST(ToyBackend, InvalidSpecRejected) {
  ToyModelSpec s;
  s.token_text.clear();
  EXPECT_THROW(ToyBackend{s}, BackendError);
  s = ToyModelSpec{};
  s.eos = s.bos;
  EXPECT_THROW(ToyBackend{s}, BackendError);
  s = ToyModelSpec{};
  s.content_count = 13;
  EXPECT_THROW(ToyBackend{s}, BackendError);
}

TEST(ToyBackend, FrameCodingRoundTripsEveryContentToken) {
  ToyBackend b;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<TokenId> frames;
    for (TokenId t = 4; t < 16; ++t) frames.push_back(t);
    std::shuffle(frames.begin(), frames.end(), std::mt19937_64(seed));
    const auto decoded = b.frames_of(render_frames(frames, kSpec, seed));
    ASSERT_EQ(decoded.size(), frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
      EXPECT_EQ(decoded[i].kind, ToyFrame::Kind::kVoiced);
      EXPECT_EQ(decoded[i].token, frames[i]);
    }
  }
}

TEST(ToyBackend, FrameKinds) {
  ToyBackend b;
  const auto room = b.frames_of(frames_audio({kSilentFrame}));
  EXPECT_EQ(room.at(0).kind, ToyFrame::Kind::kSilent);
  Waveform zero;
  zero.samples.assign(16000, 0.0f);
  EXPECT_EQ(b.frames_of(zero).at(0).kind, ToyFrame::Kind::kVoid);
}

TEST(ToyBackend, EvidenceTokenIsArgmaxAfterBos) {
  ToyBackend b;
  const std::vector<Waveform> batch{frames_audio({7})};
  ScopedEncoderState st(b, b.encode_batch(batch));
  const std::vector<TokenId> prefix{0};
  EXPECT_EQ(argmax_of(b.decode_step(st.get(), prefix).positive), 7);
}

TEST(ToyBackend, ContentFollowsGroundTruthPrefix) {
  ToyBackend b;
  const std::vector<TokenId> truth{5, 9, 4, 12, 12, 15};
  const std::vector<Waveform> batch{frames_audio(truth)};
  ScopedEncoderState st(b, b.encode_batch(batch));
  std::vector<TokenId> prefix{0};
  for (TokenId t : truth) {
    EXPECT_EQ(argmax_of(b.decode_step(st.get(), prefix).positive), t);
    prefix.push_back(t);
  }
  EXPECT_EQ(argmax_of(b.decode_step(st.get(), prefix).positive), 1);
}

TEST(ToyBackend, SilentFrameHallucinatesWithMargin) {
  ToyBackend b;
  const std::vector<TokenId> prefix{0};
  for (const auto kind : {ToyFrame::Kind::kSilent, ToyFrame::Kind::kVoid}) {
    const std::vector<ToyFrame> frames(3, ToyFrame{kind, -1});
    const LogitVector l = b.path_logits(frames, prefix);
    EXPECT_EQ(argmax_of(l), kSpec.halluc);
    EXPECT_GE(l[2] - l[1], 1.0);
  }
}

TEST(ToyBackend, ZeroHallucinationBiasMakesEosWin) {
  ToyModelSpec s;
  s.halluc_bias = 0.0;
  s.void_extra_bias = 0.0;
  ToyBackend b(s);
  const std::vector<TokenId> prefix{0};
  for (const auto kind : {ToyFrame::Kind::kSilent, ToyFrame::Kind::kVoid}) {
    const std::vector<ToyFrame> frames(3, ToyFrame{kind, -1});
    EXPECT_EQ(argmax_of(b.path_logits(frames, prefix)), 1);
  }
}

TEST(ToyBackend, PathCountAndBatchChecks) {
  ToyBackend b;
  const Waveform a = frames_audio({4, 5});
  std::vector<Waveform> four(4, a);
  const EncoderState st = b.encode_batch(four);
  EXPECT_EQ(st.path_count, 4u);
  b.release(st);
  const std::vector<Waveform> one{a};
  const EncoderState st1 = b.encode_batch(one);
  EXPECT_EQ(st1.path_count, 1u);
  b.release(st1);
  EXPECT_EQ(b.live_states(), 0u);

  std::vector<Waveform> bad{a, frames_audio({4})};
  EXPECT_THROW(b.encode_batch(bad), BackendError);
  Waveform other_rate = a;
  other_rate.sample_rate = 8000;
  std::vector<Waveform> rate{other_rate};
  EXPECT_THROW(b.encode_batch(rate), BackendError);
  EXPECT_THROW(b.encode_batch(std::span<const Waveform>{}), BackendError);
}

TEST(ToyBackend, DecodeStepErrors) {
  ToyBackend b;
  const std::vector<Waveform> batch{frames_audio({4})};
  const EncoderState st = b.encode_batch(batch);
  std::vector<TokenId> long_prefix(449, 4);
  try {
    b.decode_step(st, long_prefix);
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_NE(std::string(e.what()).find("context overflow"), std::string::npos);
  }
  const std::vector<TokenId> oov{0, 99};
  EXPECT_THROW(b.decode_step(st, oov), BackendError);
  b.release(st);
  const std::vector<TokenId> ok{0};
  EXPECT_THROW(b.decode_step(st, ok), BackendError);
}

TEST(ToyBackend, DeterministicSteps) {
  ToyBackend b;
  const Waveform a = frames_audio({4, kSilentFrame, 9});
  const std::vector<Waveform> batch{a, silence(a)};
  ScopedEncoderState st(b, b.encode_batch(batch));
  const std::vector<TokenId> prefix{0, 4};
  const StepLogits x = b.decode_step(st.get(), prefix);
  const StepLogits y = b.decode_step(st.get(), prefix);
  EXPECT_EQ(x.positive, y.positive);
  EXPECT_EQ(x.negatives, y.negatives);
}

TEST(ToyBackend, PropertyPathIndependence) {
  ToyBackend b;
  const Waveform clean = frames_audio({4, kSilentFrame, 9, 10, kSilentFrame});
  const auto negs = apply_set(clean, PerturbationSet::defaults(5));
  std::vector<Waveform> forward{clean, negs[0], negs[1], negs[2]};
  std::vector<Waveform> permuted{clean, negs[2], negs[0], negs[1]};
  ScopedEncoderState s1(b, b.encode_batch(forward));
  ScopedEncoderState s2(b, b.encode_batch(permuted));
  for (const std::vector<TokenId>& prefix :
       {std::vector<TokenId>{0}, std::vector<TokenId>{0, 4, 2}, std::vector<TokenId>{3, 0, 4}}) {
    const StepLogits a = b.decode_step(s1.get(), prefix);
    const StepLogits c = b.decode_step(s2.get(), prefix);
    EXPECT_EQ(a.positive, c.positive);
    EXPECT_EQ(a.negatives[0], c.negatives[1]);
    EXPECT_EQ(a.negatives[1], c.negatives[2]);
    EXPECT_EQ(a.negatives[2], c.negatives[0]);
  }
}

TEST(ToyBackend, ContextHallucinationsPrimeTheHallucToken) {
  ToyBackend b;
  const std::vector<ToyFrame> frames(2, ToyFrame{ToyFrame::Kind::kVoiced, 6});
  const std::vector<TokenId> plain{0};
  const std::vector<TokenId> primed{2, 2, 2, 2, 0};
  const LogitVector a = b.path_logits(frames, plain);
  const LogitVector c = b.path_logits(frames, primed);
  EXPECT_FLOAT_EQ(c[2] - a[2], 1.0f + 3.0f);  // four primers + repeat bonus on the last one
  EXPECT_EQ(a[6], c[6]);
}

TEST(Vocab, DetokenizeSkipsSpecials) {
  ToyBackend b;
  const std::vector<TokenId> toks{0, 4, 2, 1};
  EXPECT_EQ(b.vocab().detokenize(toks), "alpha thanks");
  Vocab v;
  v.size = 3;
  EXPECT_EQ(v.text(2), "<2>");
  v.bos = v.eos = 0;
  EXPECT_THROW(v.validate(), BackendError);
}

}  // namespace
}  // namespace cdasr
