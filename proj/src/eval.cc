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

#include "cdasr/eval.h"

#include <algorithm>
#include <cctype>

#include "cdasr/longform.h"

namespace cdasr {

namespace {

// Decodes one UTF-8 code point starting at text[i]; invalid bytes decode as
// themselves so that no input is lost.
char32_t next_code_point(std::string_view text, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  const auto cont = [&](std::size_t k) -> int {
    if (i + k >= text.size()) return -1;
    const auto b = static_cast<unsigned char>(text[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(1) >= 0) {
    const char32_t cp = ((b0 & 0x1F) << 6) | cont(1);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) >= 0 && cont(2) >= 0) {
    const char32_t cp = ((b0 & 0x0F) << 12) | (cont(1) << 6) | cont(2);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) >= 0 && cont(2) >= 0 && cont(3) >= 0) {
    const char32_t cp =
        ((b0 & 0x07) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3);
    i += 4;
    return cp;
  }
  ++i;
  return b0;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

// General category P* for ASCII, Latin-1, General Punctuation, CJK and
// fullwidth forms.
bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    switch (cp) {
      case '!': case '"': case '#': case '%': case '&': case '\'': case '(':
      case ')': case '*': case ',': case '-': case '.': case '/': case ':':
      case ';': case '?': case '@': case '[': case '\\': case ']': case '_':
      case '{': case '}':
        return true;
      default:
        return false;
    }
  }
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB:
    case 0xBF: case 0x37E: case 0x387: case 0x55A: case 0x589: case 0x5BE:
    case 0x60C: case 0x61F: case 0x6D4:
      return true;
    default:
      break;
  }
  return in(cp, 0x2010, 0x2027) || in(cp, 0x2030, 0x2043) ||
         in(cp, 0x2045, 0x2051) || in(cp, 0x2053, 0x205E) ||
         in(cp, 0x2E00, 0x2E4F) || in(cp, 0x3001, 0x3003) ||
         in(cp, 0x3008, 0x3011) || in(cp, 0x3014, 0x301F) ||
         in(cp, 0xFF01, 0xFF03) || in(cp, 0xFF05, 0xFF0A) ||
         in(cp, 0xFF0C, 0xFF0F) || in(cp, 0xFF1A, 0xFF1B) ||
         in(cp, 0xFF1F, 0xFF20) || in(cp, 0xFF3B, 0xFF3D) || cp == 0xFF3F ||
         cp == 0xFF5B || cp == 0xFF5D || in(cp, 0xFF5F, 0xFF65);
}

char32_t to_lower(char32_t cp) {
  if (in(cp, 'A', 'Z')) return cp + 0x20;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
  return cp;
}

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::string normalize(std::string_view text, const NormalizationRules& rules) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    char32_t cp = next_code_point(text, i);
    if (rules.lowercase) cp = to_lower(cp);
    if (rules.strip_punctuation && is_punctuation(cp)) continue;
    append_utf8(out, cp);
  }
  if (!rules.collapse_whitespace) return out;
  std::string collapsed;
  for (const auto& w : split_words(out)) {
    if (!collapsed.empty()) collapsed += ' ';
    collapsed += w;
  }
  return collapsed;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

WordAlignment align_words(std::span<const std::string> ref,
                          std::span<const std::string> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  const auto at = [&](std::size_t i, std::size_t j) -> std::size_t& {
    return d[i * (m + 1) + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  WordAlignment out;
  out.ref_word_count = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::size_t cur = at(i, j);
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && cur == at(i - 1, j - 1)) {
      out.pairs.push_back({EditOp::kMatch, static_cast<long>(i - 1), static_cast<long>(j - 1)});
      --i, --j;
    } else if (i > 0 && j > 0 && cur == at(i - 1, j - 1) + 1) {
      out.pairs.push_back({EditOp::kSubstitution, static_cast<long>(i - 1), static_cast<long>(j - 1)});
      ++out.substitutions;
      --i, --j;
    } else if (i > 0 && cur == at(i - 1, j) + 1) {
      out.pairs.push_back({EditOp::kDeletion, static_cast<long>(i - 1), -1});
      ++out.deletions;
      --i;
    } else {
      out.pairs.push_back({EditOp::kInsertion, -1, static_cast<long>(j - 1)});
      ++out.insertions;
      --j;
    }
  }
  std::reverse(out.pairs.begin(), out.pairs.end());
  return out;
}

EvalReport word_error_rate(std::string_view ref, std::string_view hyp,
                           const NormalizationRules& rules) {
  return evaluate(ref, hyp, std::nullopt, 0.0, rules);
}

Throughput throughput(std::size_t total_tokens, double wall_time_s,
                      double audio_duration_s) {
  if (!(wall_time_s > 0.0)) throw EvalError("wall time must be positive");
  if (!(audio_duration_s > 0.0)) throw EvalError("audio duration must be positive");
  return {static_cast<double>(total_tokens) / wall_time_s,
          wall_time_s / audio_duration_s};
}

Throughput throughput(const TranscriptResult& result) {
  return throughput(result.total_tokens, result.total_wall_time_s,
                    result.audio_duration_s);
}

std::size_t longest_repeat_run(std::span<const std::string> words) {
  const std::size_t len = words.size();
  if (len == 0) return 0;
  std::size_t best = 1;
  for (std::size_t n = 1; n <= 4 && 2 * n <= len; ++n) {
    for (std::size_t start = 0; start + n <= len; ++start) {
      std::size_t run = 1;
      while (start + (run + 1) * n <= len &&
             std::equal(words.begin() + static_cast<std::ptrdiff_t>(start),
                        words.begin() + static_cast<std::ptrdiff_t>(start + n),
                        words.begin() + static_cast<std::ptrdiff_t>(start + run * n))) {
        ++run;
      }
      best = std::max(best, run);
    }
  }
  return best;
}

std::size_t repetition_diagnostics(std::string_view hyp) {
  return longest_repeat_run(split_words(hyp));
}

std::vector<double> reference_word_times(std::size_t n_words,
                                         std::span<const SilenceSpan> spans,
                                         double word_s) {
  std::vector<double> times;
  times.reserve(n_words);
  double t = 0.0;
  while (times.size() < n_words) {
    bool silent = false;
    for (const auto& s : spans) {
      if (t + 1e-9 >= s.start_s && t < s.end_s - 1e-9) {
        t = s.end_s;
        silent = true;
        break;
      }
    }
    if (silent) continue;
    times.push_back(t);
    t += word_s;
  }
  return times;
}

std::size_t count_silence_insertions(const WordAlignment& alignment,
                                     std::span<const double> ref_times,
                                     std::span<const SilenceSpan> spans,
                                     double duration_s, double word_s) {
  const auto& pairs = alignment.pairs;
  std::size_t count = 0;
  long prev_ref = -1;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].ref_index >= 0) {
      prev_ref = pairs[p].ref_index;
      continue;
    }
    long next_ref = -1;
    for (std::size_t q = p + 1; q < pairs.size(); ++q) {
      if (pairs[q].ref_index >= 0) {
        next_ref = pairs[q].ref_index;
        break;
      }
    }
    const double gap_start =
        prev_ref >= 0 ? ref_times[static_cast<std::size_t>(prev_ref)] + word_s : 0.0;
    const double gap_end =
        next_ref >= 0 ? ref_times[static_cast<std::size_t>(next_ref)] : duration_s;
    for (const auto& s : spans) {
      if (std::max(gap_start, s.start_s) < std::min(gap_end, s.end_s)) {
        ++count;
        break;
      }
    }
  }
  return count;
}

EvalReport evaluate(std::string_view ref, std::string_view hyp,
                    std::optional<std::span<const SilenceSpan>> spans,
                    double duration_s, const NormalizationRules& rules) {
  const auto ref_words = split_words(normalize(ref, rules));
  if (ref_words.empty()) throw EvalError("empty reference");
  const auto hyp_words = split_words(normalize(hyp, rules));
  const auto a = align_words(ref_words, hyp_words);
  EvalReport r;
  r.substitutions = a.substitutions;
  r.deletions = a.deletions;
  r.insertions = a.insertions;
  r.ref_word_count = a.ref_word_count;
  r.wer = 100.0 * static_cast<double>(a.errors()) /
          static_cast<double>(a.ref_word_count);
  r.longest_repeat_run = longest_repeat_run(hyp_words);
  if (spans) {
    const auto times = reference_word_times(ref_words.size(), *spans);
    r.silence_insertions = count_silence_insertions(a, times, *spans, duration_s);
  }
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j = {{"wer", r.wer},
                      {"substitutions", r.substitutions},
                      {"deletions", r.deletions},
                      {"insertions", r.insertions},
                      {"ref_word_count", r.ref_word_count},
                      {"longest_repeat_run", r.longest_repeat_run}};
  if (r.tokens_per_second) j["tokens_per_second"] = *r.tokens_per_second;
  if (r.rtf) j["rtf"] = *r.rtf;
  if (r.silence_insertions) j["silence_insertions"] = *r.silence_insertions;
  return j;
}

}  // namespace cdasr
