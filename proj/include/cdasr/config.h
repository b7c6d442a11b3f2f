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

#ifndef CDASR_CONFIG_H_
#define CDASR_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cdasr/backend.h"
#include "cdasr/decoder.h"
#include "cdasr/longform.h"
#include "cdasr/perturb.h"

namespace cdasr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Minimal TOML subset: [section], [[array.of.tables]], key = value with
// strings, integers, floats, booleans and flat arrays, plus '#' comments.
struct ConfigValue;
using ConfigArray = std::vector<ConfigValue>;
struct ConfigValue {
  std::variant<bool, std::int64_t, double, std::string, ConfigArray> v;

  bool is_number() const;
  double as_double(std::string_view key) const;
  std::int64_t as_int(std::string_view key) const;
  bool as_bool(std::string_view key) const;
  const std::string& as_string(std::string_view key) const;
  const ConfigArray& as_array(std::string_view key) const;
};

using ConfigTable = std::map<std::string, ConfigValue>;

struct ConfigDocument {
  // "" holds top-level keys.
  std::map<std::string, ConfigTable> tables;
  std::map<std::string, std::vector<ConfigTable>> table_arrays;
};

ConfigDocument parse_config(std::string_view text);

enum class BackendKind { kToy, kRemote };

struct RunConfig {
  BackendKind backend = BackendKind::kToy;
  std::string endpoint;
  double timeout_s = 30.0;

  // Empty list means the defaults: gaussian at snr_db, silence, shift by shift_s.
  std::vector<PerturbationSpec> perturbations;
  double snr_db = 10.0;
  double shift_s = 7.0;

  DecodeConfig decode;
  ContextPolicy context;
  double segment_s = 30.0;
  std::uint64_t seed = 0;

  PerturbationSet perturbation_set() const;
  std::unique_ptr<Backend> make_backend() const;
  void validate() const;
};

// Applies a parsed document on top of `base`; unknown keys are errors.
RunConfig apply_config(const ConfigDocument& doc, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// CD_SEED, if set, replaces the seed. Call after the file and before CLI flags.
void apply_seed_env(RunConfig& cfg);

}  // namespace cdasr

#endif  // CDASR_CONFIG_H_
