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

#ifndef CDASR_EVAL_H_
#define CDASR_EVAL_H_

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cdasr {

struct TranscriptResult;

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NormalizationRules {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool collapse_whitespace = true;
};

// Applies the enabled rules in declaration order. Punctuation means Unicode
// general category P*; lowercasing covers ASCII and Latin-1 letters.
std::string normalize(std::string_view text, const NormalizationRules& rules = {});

std::vector<std::string> split_words(std::string_view text);

enum class EditOp { kMatch, kSubstitution, kDeletion, kInsertion };

struct AlignedPair {
  EditOp op;
  // Index into the reference words (-1 for insertions).
  long ref_index;
  // Index into the hypothesis words (-1 for deletions).
  long hyp_index;
};

struct WordAlignment {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_word_count = 0;
  std::vector<AlignedPair> pairs;

  std::size_t errors() const { return substitutions + deletions + insertions; }
};

// Unit-cost Levenshtein alignment. Equal-cost paths are resolved in the
// backtrace by preferring match, then substitution, deletion, insertion.
WordAlignment align_words(std::span<const std::string> ref,
                          std::span<const std::string> hyp);

struct SilenceSpan {
  double start_s = 0.0;
  double end_s = 0.0;
};

struct EvalReport {
  double wer = 0.0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_word_count = 0;
  std::optional<double> tokens_per_second;
  std::optional<double> rtf;
  std::size_t longest_repeat_run = 0;
  // Absent when no silence annotations were supplied.
  std::optional<std::size_t> silence_insertions;
};

// Fills the alignment fields of an EvalReport. Throws EvalError("empty
// reference") if the normalized reference has no words.
EvalReport word_error_rate(std::string_view ref, std::string_view hyp,
                           const NormalizationRules& rules = {});

struct Throughput {
  double tokens_per_second = 0.0;
  double rtf = 0.0;
};

Throughput throughput(std::size_t total_tokens, double wall_time_s,
                      double audio_duration_s);
Throughput throughput(const TranscriptResult& result);

// Longest run of consecutive identical word n-grams, n in [1, 4].
std::size_t repetition_diagnostics(std::string_view hyp);
std::size_t longest_repeat_run(std::span<const std::string> words);

// Start time of each reference word when words occupy consecutive
// `word_s`-long slots that skip the silence spans.
std::vector<double> reference_word_times(std::size_t n_words,
                                         std::span<const SilenceSpan> spans,
                                         double word_s = 1.0);

// Inserted hypothesis words whose alignment gap overlaps a silence span. The
// gap runs from the end of the preceding aligned reference word to the
// start of the following one (0 and `duration_s` at the edges).
std::size_t count_silence_insertions(const WordAlignment& alignment,
                                     std::span<const double> ref_times,
                                     std::span<const SilenceSpan> spans,
                                     double duration_s, double word_s = 1.0);

// Full report for one file: WER, repetition, and optionally silence
// insertions (needs spans and the recording duration).
EvalReport evaluate(std::string_view ref, std::string_view hyp,
                    std::optional<std::span<const SilenceSpan>> spans,
                    double duration_s, const NormalizationRules& rules = {});

nlohmann::json to_json(const EvalReport& r);

}  // namespace cdasr

#endif  // CDASR_EVAL_H_
