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

#include <cstdlib>
#include <sstream>

#include "cdasr/cli.h"
#include "json.hpp"
#include "test_util.h"

namespace cdasr {
namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cdasr");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    CorpusSpec spec;
    spec.n_files = 2;
    spec.duration_s = 45;
    spec.silence_fraction = 0.3;
    generate(spec, dir_.path());
    manifest_ = load_manifest(dir_ / "manifest.json");
  }
  std::string path(const char* name) const { return (dir_ / name).string(); }

  testing::TempDir dir_;
  std::vector<ManifestEntry> manifest_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"transcribe"}).code, kExitUsage);
  EXPECT_EQ(cli({"transcribe", path("file_000.wav"), "--alpha", "-1"}).code, kExitUsage);
  EXPECT_EQ(cli({"bench", path("file_000.wav"), "--repeats", "0"}).code, kExitUsage);
  EXPECT_EQ(cli({"transcribe", path("file_000.wav"), "--strategies", "reverb"}).code,
            kExitUsage);
}

TEST_F(CliTest, RuntimeFailures) {
  EXPECT_EQ(cli({"transcribe", path("missing.wav")}).code, kExitFailure);
  std::ofstream(path("junk.wav")) << "not a wav";
  const CliRun r = cli({"transcribe", path("junk.wav")});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST_F(CliTest, TranscribeWritesJsonAndTiming) {
  const CliRun r = cli({"transcribe", path("file_000.wav"), "--out", path("t.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(testing::slurp(dir_ / "t.json"));
  EXPECT_TRUE(j.at("complete").get<bool>());
  EXPECT_EQ(j.at("segments").size(), 2u);
  EXPECT_FALSE(j.contains("total_wall_time_s"));
  const auto t = nlohmann::json::parse(testing::slurp(dir_ / "t.json.timing.json"));
  EXPECT_TRUE(t.contains("total_wall_time_s"));

  const CliRun again = cli({"transcribe", path("file_000.wav")});
  EXPECT_EQ(nlohmann::json::parse(again.out), j);
}

TEST_F(CliTest, EvalOfOwnTranscript) {
  ASSERT_EQ(cli({"transcribe", path("file_000.wav"), "--out", path("t.json")}).code, kExitOk);
  const CliRun r = cli({"eval", "--ref", path("file_000.ref.txt"), "--hyp", path("t.json"),
                     "--spans", path("file_000.spans.json"), "--timing",
                     path("t.json.timing.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j.at("wer").get<double>(), 0.0);
  EXPECT_EQ(j.at("silence_insertions").get<int>(), 0);
  EXPECT_GT(j.at("tokens_per_second").get<double>(), 0.0);

  std::ofstream(path("hyp.txt")) << "totally different words";
  std::ofstream(path("empty.txt")) << "  ";
  EXPECT_EQ(cli({"eval", "--ref", path("file_000.ref.txt"), "--hyp", path("hyp.txt")}).code,
            kExitOk);
  EXPECT_EQ(cli({"eval", "--ref", path("empty.txt"), "--hyp", path("hyp.txt")}).code,
            kExitFailure);
  EXPECT_EQ(cli({"eval", "--ref", path("file_000.ref.txt"), "--hyp", path("hyp.txt"), "--spans",
                 path("file_000.spans.json")})
                .code,
            kExitUsage);
}

TEST_F(CliTest, SweepIsReproducibleAndMatchesTranscribe) {
  const std::vector<std::string> args = {"sweep", "--manifest", path("manifest.json"),
                                         "--alphas", "0,1", "--strategy-sets",
                                         "silence,all", "--jobs", "2"};
  const CliRun a = cli(args);
  const CliRun b = cli(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  std::istringstream lines(a.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line,
            "run_id,alpha,tau,strategy_set,file,wer,substitutions,deletions,insertions,"
            "ref_words,longest_repeat_run,silence_insertions,total_tokens,status");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 2u * 2u * 3u);

  // The alpha 0 rows must agree with a plain baseline transcription.
  RunConfig base;
  base.decode.alpha = 0.0;
  const auto sweep = run_sweep(base, manifest_, {0.0}, {"all"});
  ASSERT_EQ(cli({"transcribe", path("file_001.wav"), "--alpha", "0", "--out", path("b.json")})
                .code,
            kExitOk);
  const auto j = nlohmann::json::parse(testing::slurp(dir_ / "b.json"));
  EXPECT_EQ(sweep[1].total_tokens, j.at("total_tokens").get<std::size_t>());
  const EvalReport rep =
      word_error_rate(testing::slurp(dir_ / "file_001.ref.txt"), j.at("full_text").get<std::string>());
  EXPECT_DOUBLE_EQ(sweep[1].wer, rep.wer);
}

TEST_F(CliTest, SweepWritesTimingSidecar) {
  const CliRun r = cli({"sweep", "--manifest", path("manifest.json"), "--alphas", "1",
                     "--strategy-sets", "all", "--out", path("s.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string timing = testing::slurp(dir_ / "s.csv.timing.csv");
  EXPECT_EQ(timing.rfind("run_id,file,wall_time_s,tokens_per_s,rtf\n", 0), 0u);

  const CliRun p = cli({"plot", path("s.csv"), "--svg", path("s.svg")});
  ASSERT_EQ(p.code, kExitOk) << p.err;
  EXPECT_EQ(p.out.rfind("alpha\tmean_wer\n1\t", 0), 0u);
  EXPECT_NE(testing::slurp(dir_ / "s.svg").find("<svg"), std::string::npos);
}

TEST_F(CliTest, BenchColumns) {
  const CliRun r = cli({"bench", path("file_000.wav"), "--repeats", "1", "--ref",
                     path("file_000.ref.txt"), "--compare-baseline"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string header, cd, base;
  std::getline(lines, header);
  std::getline(lines, cd);
  std::getline(lines, base);
  EXPECT_EQ(header, "run_id,alpha,tau,strategy_set,wer,tokens_per_s,rtf,longest_repeat_run");
  EXPECT_EQ(cd.rfind("cd,1,1,gaussian+silence+shift,", 0), 0u) << cd;
  EXPECT_EQ(base.rfind("baseline,0,1,none,", 0), 0u) << base;
}

TEST_F(CliTest, BenchArithmetic) {
  RunConfig cfg;
  const Waveform audio = load_waveform(manifest_[0].audio);
  const BenchRow row = run_bench(cfg, audio, std::nullopt, 3, "cd");
  ASSERT_EQ(row.runs.size(), 3u);
  std::vector<double> tps;
  for (const auto& run : row.runs) {
    tps.push_back(static_cast<double>(run.total_tokens) / run.total_wall_time_s);
  }
  std::sort(tps.begin(), tps.end());
  EXPECT_DOUBLE_EQ(row.tokens_per_s, tps[1]);
  EXPECT_FALSE(row.wer.has_value());
  EXPECT_THROW(run_bench(cfg, audio, std::nullopt, 0, "cd"), std::invalid_argument);
}

TEST_F(CliTest, PlotRejectsBadInput) {
  std::ofstream(path("empty.csv")) << "";
  std::ofstream(path("header.csv"))
      << "run_id,alpha,tau,strategy_set,wer,tokens_per_s,rtf,longest_repeat_run\n";
  std::ofstream(path("short.csv"))
      << "run_id,alpha,tau,strategy_set,wer,tokens_per_s,rtf,longest_repeat_run\ncd,1,1\n";
  std::ofstream(path("other.csv")) << "a,b\n1,2\n";
  for (const char* f : {"empty.csv", "header.csv", "short.csv", "other.csv"}) {
    EXPECT_EQ(cli({"plot", path(f)}).code, kExitFailure) << f;
  }
}

TEST_F(CliTest, PerturbAndSynth) {
  const CliRun r = cli({"perturb", path("file_000.wav"), "--out-dir", path("p"), "--seed", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* kind : {"gaussian_noise", "silence", "temporal_shift"}) {
    const auto f = dir_ / "p" / (std::string("file_000.") + kind + ".wav");
    ASSERT_TRUE(std::filesystem::exists(f)) << f;
    EXPECT_EQ(load_waveform(f).samples.size(), 45u * 16000u);
  }

  ::setenv("CD_SEED", "77", 1);
  const CliRun s1 = cli({"synth", "--out-dir", path("c1"), "--files", "1", "--duration", "5"});
  ::unsetenv("CD_SEED");
  const CliRun s2 = cli({"synth", "--out-dir", path("c2"), "--files", "1", "--duration", "5",
                      "--seed", "77"});
  ASSERT_EQ(s1.code, kExitOk) << s1.err;
  ASSERT_EQ(s2.code, kExitOk) << s2.err;
  EXPECT_EQ(testing::slurp(dir_ / "c1" / "file_000.wav"),
            testing::slurp(dir_ / "c2" / "file_000.wav"));
}

TEST_F(CliTest, ConfigFileAndPrecedence) {
  std::ofstream(path("c.toml")) << "seed = 5\n[decode]\nalpha = 0\n";
  const CliRun a = cli({"transcribe", path("file_000.wav"), "--config", path("c.toml")});
  const CliRun b = cli({"transcribe", path("file_000.wav"), "--alpha", "0"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(nlohmann::json::parse(a.out).at("full_text"),
            nlohmann::json::parse(b.out).at("full_text"));
  std::ofstream(path("bad.toml")) << "[decode]\nalpah = 1\n";
  EXPECT_EQ(cli({"transcribe", path("file_000.wav"), "--config", path("bad.toml")}).code,
            kExitUsage);
}

TEST_F(CliTest, UnreachableEndpointFails) {
  const CliRun r = cli({"transcribe", path("file_000.wav"), "--endpoint", "127.0.0.1:1",
                     "--timeout", "1"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("connection failure"), std::string::npos);
}

}  // namespace
}  // namespace cdasr
