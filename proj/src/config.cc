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

#include "cdasr/config.h"

#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "cdasr/remote_backend.h"
#include "cdasr/toy_backend.h"

namespace cdasr {

namespace {

[[noreturn]] void type_error(std::string_view key, const char* want) {
  throw ConfigError("config key '" + std::string(key) + "' must be " + want);
}

class LineParser {
 public:
  LineParser(std::string_view text, std::size_t line_no) : s_(text), line_(line_no) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string key() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
            s_[pos_] == '-' || s_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  ConfigValue value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return {string()};
    if (c == '[') {
      ++pos_;
      ConfigArray items;
      if (consume(']')) return {std::move(items)};
      for (;;) {
        items.push_back(value());
        if (consume(']')) break;
        if (!consume(',')) fail("expected ',' or ']' in array");
        if (consume(']')) break;  // trailing comma
      }
      return {std::move(items)};
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' &&
           s_[pos_] != ' ' && s_[pos_] != '\t') {
      ++pos_;
    }
    const std::string_view tok = s_.substr(start, pos_ - start);
    if (tok == "true") return {true};
    if (tok == "false") return {false};
    const bool floating = tok.find_first_of(".eE") != std::string_view::npos ||
                          tok == "inf" || tok == "nan";
    if (!floating) {
      std::int64_t i = 0;
      const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), i);
      if (ec == std::errc() && p == tok.data() + tok.size()) return {i};
    } else {
      double d = 0.0;
      const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
      if (ec == std::errc() && p == tok.data() + tok.size()) return {d};
    }
    fail("cannot parse value '" + std::string(tok) + "'");
  }

 private:
  std::string string() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= s_.size()) break;
      switch (const char e = s_[pos_++]) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
    fail("unterminated string");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

Selection parse_selection(const std::string& s) {
  if (s == "greedy") return Selection::kGreedy;
  if (s == "beam") return Selection::kBeam;
  throw ConfigError("decode.selection must be \"greedy\" or \"beam\", got '" + s + "'");
}

std::size_t as_count(const ConfigValue& v, std::string_view key) {
  const auto i = v.as_int(key);
  if (i < 0) type_error(key, "non-negative");
  return static_cast<std::size_t>(i);
}

PerturbationSpec perturbation_record(const ConfigTable& t, double snr_db, double shift_s) {
  const auto kind_it = t.find("kind");
  if (kind_it == t.end()) throw ConfigError("[[perturbation]] entry needs a kind");
  const auto kind = parse_perturbation_kind(kind_it->second.as_string("perturbation.kind"));
  if (!kind) {
    throw ConfigError("unknown perturbation kind '" +
                      kind_it->second.as_string("perturbation.kind") + "'");
  }
  PerturbationSpec spec;
  spec.kind = *kind;
  spec.snr_db = snr_db;
  spec.shift_s = shift_s;
  for (const auto& [k, v] : t) {
    if (k == "kind") continue;
    if (k == "snr_db") {
      spec.snr_db = v.as_double("perturbation.snr_db");
    } else if (k == "shift_s") {
      spec.shift_s = v.as_double("perturbation.shift_s");
    } else if (k == "seed") {
      spec.seed = static_cast<std::uint64_t>(v.as_int("perturbation.seed"));
    } else {
      throw ConfigError("unknown key '" + k + "' in [[perturbation]]");
    }
  }
  return spec;
}

}  // namespace

bool ConfigValue::is_number() const {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

double ConfigValue::as_double(std::string_view key) const {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  type_error(key, "a number");
}

std::int64_t ConfigValue::as_int(std::string_view key) const {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  type_error(key, "an integer");
}

bool ConfigValue::as_bool(std::string_view key) const {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  type_error(key, "true or false");
}

const std::string& ConfigValue::as_string(std::string_view key) const {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  type_error(key, "a string");
}

const ConfigArray& ConfigValue::as_array(std::string_view key) const {
  if (const auto* a = std::get_if<ConfigArray>(&v)) return *a;
  type_error(key, "an array");
}

ConfigDocument parse_config(std::string_view text) {
  ConfigDocument doc;
  doc.tables[""];
  ConfigTable* current = &doc.tables[""];
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    ++line_no;
    start = end + 1;

    LineParser p(raw, line_no);
    if (p.at_end_or_comment()) {
      if (end == text.size()) break;
      continue;
    }
    if (p.consume('[')) {
      const bool array = p.consume('[');
      const std::string name = p.key();
      if (!p.consume(']') || (array && !p.consume(']'))) p.fail("malformed table header");
      if (!p.at_end_or_comment()) p.fail("trailing text after table header");
      if (array) {
        current = &doc.table_arrays[name].emplace_back();
      } else {
        if (doc.tables.count(name) && name != "") p.fail("duplicate table [" + name + "]");
        current = &doc.tables[name];
      }
    } else {
      const std::string k = p.key();
      if (!p.consume('=')) p.fail("expected '=' after key '" + k + "'");
      ConfigValue v = p.value();
      if (!p.at_end_or_comment()) p.fail("trailing text after value");
      if (!current->emplace(k, std::move(v)).second) p.fail("duplicate key '" + k + "'");
    }
    if (end == text.size()) break;
  }
  return doc;
}

PerturbationSet RunConfig::perturbation_set() const {
  if (perturbations.empty()) {
    return PerturbationSet({PerturbationSpec::gaussian(snr_db), PerturbationSpec::silence(),
                            PerturbationSpec::shift(shift_s)});
  }
  return PerturbationSet(perturbations);
}

std::unique_ptr<Backend> RunConfig::make_backend() const {
  if (backend == BackendKind::kRemote) {
    const auto ms = std::chrono::milliseconds(std::llround(timeout_s * 1000.0));
    return std::make_unique<RemoteBackend>(endpoint, ms);
  }
  return std::make_unique<ToyBackend>();
}

void RunConfig::validate() const {
  if (backend == BackendKind::kRemote && endpoint.empty()) {
    throw ConfigError("remote backend needs an endpoint");
  }
  if (!(timeout_s > 0.0)) throw ConfigError("backend.timeout_s must be positive");
  if (!(segment_s > 0.0)) throw ConfigError("longform.segment_s must be positive");
  try {
    decode.validate();
    (void)perturbation_set();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig apply_config(const ConfigDocument& doc, RunConfig cfg) {
  const auto unknown = [](const std::string& table, const std::string& key) {
    return ConfigError("unknown config key '" + (table.empty() ? key : table + "." + key) +
                       "'");
  };
  std::optional<std::string> strategies;
  for (const auto& [table, entries] : doc.tables) {
    for (const auto& [k, v] : entries) {
      const std::string full = table.empty() ? k : table + "." + k;
      if (table.empty()) {
        if (k == "seed") {
          const auto s = v.as_int(full);
          if (s < 0) type_error(full, "non-negative");
          cfg.seed = static_cast<std::uint64_t>(s);
        } else {
          throw unknown(table, k);
        }
      } else if (table == "backend") {
        if (k == "kind") {
          const auto& kind = v.as_string(full);
          if (kind == "toy") {
            cfg.backend = BackendKind::kToy;
          } else if (kind == "remote") {
            cfg.backend = BackendKind::kRemote;
          } else {
            throw ConfigError("backend.kind must be \"toy\" or \"remote\"");
          }
        } else if (k == "endpoint") {
          cfg.endpoint = v.as_string(full);
        } else if (k == "timeout_s") {
          cfg.timeout_s = v.as_double(full);
        } else {
          throw unknown(table, k);
        }
      } else if (table == "perturbations") {
        if (k == "snr_db") {
          cfg.snr_db = v.as_double(full);
        } else if (k == "shift_s") {
          cfg.shift_s = v.as_double(full);
        } else if (k == "strategies") {
          strategies = v.as_string(full);
        } else if (k == "silence_domain") {
          if (v.as_string(full) != "waveform") {
            throw ConfigError("only the waveform silence domain is implemented");
          }
        } else {
          throw unknown(table, k);
        }
      } else if (table == "decode") {
        if (k == "alpha") {
          cfg.decode.alpha = v.as_double(full);
        } else if (k == "tau") {
          cfg.decode.tau = v.as_double(full);
        } else if (k == "selection") {
          cfg.decode.selection = parse_selection(v.as_string(full));
        } else if (k == "beam_width") {
          cfg.decode.beam_width = as_count(v, full);
        } else if (k == "max_tokens") {
          cfg.decode.max_tokens_per_segment = as_count(v, full);
        } else if (k == "suppress_tokens") {
          cfg.decode.suppress_tokens.clear();
          for (const auto& t : v.as_array(full)) {
            cfg.decode.suppress_tokens.insert(static_cast<TokenId>(t.as_int(full)));
          }
        } else {
          throw unknown(table, k);
        }
      } else if (table == "context") {
        if (k == "enabled") {
          cfg.context.enabled = v.as_bool(full);
        } else if (k == "max_tokens") {
          cfg.context.max_context_tokens = as_count(v, full);
        } else if (k == "clear_on_overflow") {
          cfg.context.clear_on_overflow = v.as_bool(full);
        } else {
          throw unknown(table, k);
        }
      } else if (table == "longform") {
        if (k == "segment_s") {
          cfg.segment_s = v.as_double(full);
        } else {
          throw unknown(table, k);
        }
      } else {
        throw ConfigError("unknown config table [" + table + "]");
      }
    }
  }
  if (strategies) {
    try {
      cfg.perturbations =
          PerturbationSet::from_names(*strategies, cfg.snr_db, cfg.shift_s).specs();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  for (const auto& [name, records] : doc.table_arrays) {
    if (name != "perturbation") throw ConfigError("unknown table array [[" + name + "]]");
    if (doc.tables.count("perturbations") && doc.tables.at("perturbations").count("strategies")) {
      throw ConfigError("use either perturbations.strategies or [[perturbation]], not both");
    }
    cfg.perturbations.clear();
    for (const auto& t : records) {
      cfg.perturbations.push_back(perturbation_record(t, cfg.snr_db, cfg.shift_s));
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return apply_config(parse_config(ss.str()), std::move(base));
}

void apply_seed_env(RunConfig& cfg) {
  const char* env = std::getenv("CD_SEED");
  if (env == nullptr || *env == '\0') return;
  const std::string_view s(env);
  std::uint64_t seed = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("CD_SEED must be a non-negative integer, got '" + std::string(s) + "'");
  }
  cfg.seed = seed;
}

}  // namespace cdasr
