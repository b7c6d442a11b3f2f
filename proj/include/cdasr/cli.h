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

#ifndef CDASR_CLI_H_
#define CDASR_CLI_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdasr/config.h"
#include "cdasr/eval.h"
#include "cdasr/longform.h"
#include "cdasr/synth.h"

namespace cdasr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

TranscriptResult run_transcribe(const RunConfig& cfg, const Waveform& audio,
                                Backend& backend);

// One sweep row. file == "ALL" marks the corpus aggregate of a run.
struct SweepRow {
  std::string run_id;
  double alpha = 0.0;
  double tau = 1.0;
  std::string strategy_set;
  std::string file;
  double wer = 0.0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_words = 0;
  std::size_t longest_repeat_run = 0;
  std::optional<std::size_t> silence_insertions;
  std::size_t total_tokens = 0;
  std::string status = "ok";
  // Not part of the reproducible CSV.
  double wall_time_s = 0.0;
  double audio_duration_s = 0.0;
};

std::vector<SweepRow> run_sweep(const RunConfig& cfg,
                                const std::vector<ManifestEntry>& manifest,
                                const std::vector<double>& alphas,
                                const std::vector<std::string>& strategy_sets,
                                std::size_t jobs = 1);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_timing_csv(const std::vector<SweepRow>& rows);

struct BenchRow {
  std::string run_id;
  double alpha = 0.0;
  double tau = 1.0;
  std::string strategy_set;
  std::optional<double> wer;
  // Medians over the timed repeats.
  double tokens_per_s = 0.0;
  double rtf = 0.0;
  std::size_t longest_repeat_run = 0;
  std::vector<TranscriptResult> runs;  // timed repeats, warmup excluded
};

BenchRow run_bench(const RunConfig& cfg, const Waveform& audio,
                   const std::optional<std::string>& reference, std::size_t repeats,
                   std::string run_id);

std::string bench_csv(const std::vector<BenchRow>& rows);

struct PlotData {
  std::string tsv;
  std::string svg;
};

// Accepts sweep or bench CSV text.
PlotData plot_data(std::string_view csv);

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace cdasr

#endif  // CDASR_CLI_H_
