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

#include <atomic>
#include <thread>

#include "cdasr/longform.h"
#include "cdasr/protocol_server.h"
#include "cdasr/remote_backend.h"
#include "cdasr/synth.h"
#include "cdasr/toy_backend.h"

namespace cdasr {
namespace {

using std::chrono::milliseconds;

Waveform toy_audio(std::size_t seconds, std::uint64_t seed) {
  std::vector<TokenId> frames;
  for (std::size_t i = 0; i < seconds; ++i) {
    frames.push_back(i % 5 == 4 ? kSilentFrame : static_cast<TokenId>(4 + (i * 7 + seed) % 12));
  }
  return render_frames(frames, ToyModelSpec{}, seed);
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const BackendError& e) {
    return e.what();
  }
  return "";
}

TEST(Remote, MatchesLocalToyLogits) {
  ToyBackend served;
  ProtocolServer server(backend_handler(served));
  RemoteBackend remote(server.endpoint(), milliseconds(5000));
  ToyBackend local;
  EXPECT_EQ(remote.vocab().size, local.vocab().size);
  EXPECT_EQ(remote.sample_rate(), local.sample_rate());
  EXPECT_EQ(remote.context_limit(), local.context_limit());

  const Waveform w = toy_audio(4, 1);
  const std::vector<Waveform> paths = {w, apply(w, PerturbationSpec::silence())};
  const EncoderState rs = remote.encode_batch(paths);
  const EncoderState ls = local.encode_batch(paths);
  EXPECT_EQ(rs.path_count, 2u);
  const std::vector<TokenId> prefix = {0, 5, 9};
  const StepLogits r = remote.decode_step(rs, prefix);
  const StepLogits l = local.decode_step(ls, prefix);
  EXPECT_EQ(r.positive, l.positive);
  EXPECT_EQ(r.negatives, l.negatives);
  remote.release(rs);
  EXPECT_NE(error_of([&] { remote.decode_step(rs, prefix); }).find("stale state"),
            std::string::npos);
}

TEST(Remote, TranscriptMatchesLocal) {
  ToyBackend served;
  ProtocolServer server(backend_handler(served));
  RemoteBackend remote(server.endpoint(), milliseconds(5000));
  ToyBackend local;
  const Waveform w = toy_audio(40, 3);
  const auto pset = PerturbationSet::defaults();
  const auto a = transcribe(w, pset, {}, {}, remote);
  const auto b = transcribe(w, pset, {}, {}, local);
  EXPECT_TRUE(a.complete) << a.error;
  EXPECT_EQ(a.full_text, b.full_text);
  EXPECT_EQ(a.total_tokens, b.total_tokens);
}

TEST(Remote, WrongLengthLogits) {
  ToyBackend served;
  RequestHandler inner = backend_handler(served);
  ProtocolServer server([inner](const nlohmann::json& req) {
    nlohmann::json reply = inner(req);
    if (req.at("op") == "step") reply["logits"][0].erase(0);
    return reply;
  });
  RemoteBackend remote(server.endpoint(), milliseconds(5000));
  const Waveform w = toy_audio(2, 0);
  const EncoderState st = remote.encode_batch(std::vector<Waveform>{w});
  const std::vector<TokenId> prefix = {0};
  EXPECT_EQ(error_of([&] { remote.decode_step(st, prefix); }).rfind("vocab mismatch", 0), 0u);
}

TEST(Remote, TimeoutIsReported) {
  ToyBackend served;
  RequestHandler inner = backend_handler(served);
  ProtocolServer server([inner](const nlohmann::json& req) {
    if (req.at("op") == "step") std::this_thread::sleep_for(milliseconds(400));
    return inner(req);
  });
  RemoteBackend remote(server.endpoint(), milliseconds(100));
  const Waveform w = toy_audio(2, 0);
  const EncoderState st = remote.encode_batch(std::vector<Waveform>{w});
  const std::vector<TokenId> prefix = {0};
  EXPECT_EQ(error_of([&] { remote.decode_step(st, prefix); }), "backend timeout");
}

TEST(Remote, ErrorAndMalformedReplies) {
  ToyBackend served;
  RequestHandler inner = backend_handler(served);
  std::atomic<int> mode{0};
  ProtocolServer server([&](const nlohmann::json& req) -> nlohmann::json {
    if (req.at("op") == "step" && mode == 1) return {{"error", "model exploded"}};
    if (req.at("op") == "step" && mode == 2) return {{"logits", "nope"}};
    return inner(req);
  });
  RemoteBackend remote(server.endpoint(), milliseconds(5000));
  const Waveform w = toy_audio(2, 0);
  const EncoderState st = remote.encode_batch(std::vector<Waveform>{w});
  const std::vector<TokenId> prefix = {0};
  mode = 1;
  EXPECT_NE(error_of([&] { remote.decode_step(st, prefix); }).find("model exploded"),
            std::string::npos);
  mode = 2;
  EXPECT_EQ(error_of([&] { remote.decode_step(st, prefix); }).rfind("malformed response", 0),
            0u);
  const std::vector<TokenId> too_long(remote.context_limit() + 1, 5);
  mode = 0;
  EXPECT_EQ(error_of([&] { remote.decode_step(st, too_long); }).rfind("context overflow", 0),
            0u);
}

TEST(Remote, ConnectionRefused) {
  int port = 0;
  {
    ProtocolServer probe([](const nlohmann::json&) { return nlohmann::json::object(); });
    port = probe.port();
  }
  EXPECT_EQ(error_of([&] {
              RemoteBackend r("127.0.0.1:" + std::to_string(port), milliseconds(500));
            }).rfind("connection failure", 0),
            0u);
  EXPECT_THROW(parse_endpoint("localhost"), std::invalid_argument);
  EXPECT_THROW(parse_endpoint("h:99999"), std::invalid_argument);
  EXPECT_EQ(parse_endpoint("h:80").second, 80);
}

TEST(Remote, FailureMidRunKeepsFinishedSegments) {
  ToyBackend served;
  RequestHandler inner = backend_handler(served);
  std::atomic<int> steps{0};
  ProtocolServer server([&](const nlohmann::json& req) -> nlohmann::json {
    if (req.at("op") == "step" && ++steps > 40) return {{"error", "gpu lost"}};
    return inner(req);
  });
  RemoteBackend remote(server.endpoint(), milliseconds(5000));
  const auto r = transcribe(toy_audio(70, 2), PerturbationSet::defaults(), {}, {}, remote);
  EXPECT_FALSE(r.complete);
  EXPECT_NE(r.error.find("gpu lost"), std::string::npos);
  ASSERT_EQ(r.segments.size(), 1u);
  EXPECT_TRUE(r.segments[0].finished);
}

}  // namespace
}  // namespace cdasr
