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

#ifndef CDASR_PERTURB_H_
#define CDASR_PERTURB_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdasr/audio.h"

namespace cdasr {

enum class PerturbationKind { kGaussianNoise, kSilence, kTemporalShift };

std::string_view to_string(PerturbationKind kind);
std::optional<PerturbationKind> parse_perturbation_kind(std::string_view name);

// One negative-path transform. Only the fields relevant to `kind` are used.
struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::kSilence;
  double snr_db = 10.0;
  double shift_s = 7.0;
  std::uint64_t seed = 0;

  static PerturbationSpec gaussian(double snr_db, std::uint64_t seed = 0);
  static PerturbationSpec silence();
  static PerturbationSpec shift(double shift_s);

  void validate() const;
  bool operator==(const PerturbationSpec&) const = default;
};

// Ordered, non-empty list of perturbations. Position k is negative path k.
class PerturbationSet {
 public:
  explicit PerturbationSet(std::vector<PerturbationSpec> specs);

  // Gaussian noise at 10 dB, silence, and a 7 s leftward shift.
  static PerturbationSet defaults(std::uint64_t seed = 0);

  // Parses "all", "gaussian", "silence", "shift" or a '+'-joined combination
  // such as "gaussian+shift" into a set using the given noise/shift settings.
  static PerturbationSet from_names(std::string_view names, double snr_db,
                                    double shift_s, std::uint64_t seed = 0);

  std::size_t size() const { return specs_.size(); }
  const std::vector<PerturbationSpec>& specs() const { return specs_; }
  const PerturbationSpec& operator[](std::size_t k) const { return specs_[k]; }

  // Copy where path k's noise seed becomes its own seed + base_seed + k, so a
  // spec's seed acts as a fixed offset.
  PerturbationSet reseeded(std::uint64_t base_seed) const;

  // e.g. "gaussian+silence+shift"
  std::string label() const;

 private:
  std::vector<PerturbationSpec> specs_;
};

// x + N(0, sigma^2) with sigma set so that 10 log10(P / sigma^2) == snr_db,
// P being the mean squared sample. Zero-power input uses sigma = 0.001.
// The result is not clamped.
Waveform gaussian_noise(const Waveform& w, double snr_db, std::uint64_t seed);

// Noise standard deviation gaussian_noise() uses for `w`.
double noise_sigma(const Waveform& w, double snr_db);

Waveform silence(const Waveform& w);

// Drops the first round(shift_s * rate) samples and zero-pads the tail.
Waveform temporal_shift(const Waveform& w, double shift_s);

Waveform apply(const Waveform& w, const PerturbationSpec& spec);
std::vector<Waveform> apply_set(const Waveform& w, const PerturbationSet& set);

}  // namespace cdasr

#endif  // CDASR_PERTURB_H_
