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

#include "cdasr/perturb.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace cdasr {

namespace {

constexpr double kZeroPowerSigma = 0.001;

}  // namespace

std::string_view to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kGaussianNoise:
      return "gaussian_noise";
    case PerturbationKind::kSilence:
      return "silence";
    case PerturbationKind::kTemporalShift:
      return "temporal_shift";
  }
  return "unknown";
}

std::optional<PerturbationKind> parse_perturbation_kind(std::string_view name) {
  if (name == "gaussian_noise" || name == "gaussian" || name == "noise") {
    return PerturbationKind::kGaussianNoise;
  }
  if (name == "silence") return PerturbationKind::kSilence;
  if (name == "temporal_shift" || name == "shift") {
    return PerturbationKind::kTemporalShift;
  }
  return std::nullopt;
}

PerturbationSpec PerturbationSpec::gaussian(double snr_db, std::uint64_t seed) {
  PerturbationSpec s;
  s.kind = PerturbationKind::kGaussianNoise;
  s.snr_db = snr_db;
  s.seed = seed;
  return s;
}

PerturbationSpec PerturbationSpec::silence() {
  PerturbationSpec s;
  s.kind = PerturbationKind::kSilence;
  return s;
}

PerturbationSpec PerturbationSpec::shift(double shift_s) {
  PerturbationSpec s;
  s.kind = PerturbationKind::kTemporalShift;
  s.shift_s = shift_s;
  return s;
}

void PerturbationSpec::validate() const {
  if (kind == PerturbationKind::kGaussianNoise && !std::isfinite(snr_db)) {
    throw std::invalid_argument("snr_db must be finite");
  }
  if (kind == PerturbationKind::kTemporalShift &&
      !(std::isfinite(shift_s) && shift_s >= 0.0)) {
    throw std::invalid_argument("shift_s must be finite and >= 0");
  }
}

PerturbationSet::PerturbationSet(std::vector<PerturbationSpec> specs)
    : specs_(std::move(specs)) {
  if (specs_.empty()) {
    throw std::invalid_argument("perturbation set needs at least one spec");
  }
  for (const auto& s : specs_) s.validate();
}

PerturbationSet PerturbationSet::defaults(std::uint64_t seed) {
  return PerturbationSet({PerturbationSpec::gaussian(10.0, seed),
                          PerturbationSpec::silence(),
                          PerturbationSpec::shift(7.0)});
}

PerturbationSet PerturbationSet::from_names(std::string_view names,
                                            double snr_db, double shift_s,
                                            std::uint64_t seed) {
  if (names == "all") names = "gaussian+silence+shift";
  std::vector<PerturbationSpec> specs;
  std::size_t start = 0;
  while (start <= names.size()) {
    const std::size_t plus = names.find('+', start);
    const std::string_view part = names.substr(
        start, plus == std::string_view::npos ? std::string_view::npos
                                              : plus - start);
    const auto kind = parse_perturbation_kind(part);
    if (!kind) {
      throw std::invalid_argument("unknown perturbation '" + std::string(part) +
                                  "'");
    }
    switch (*kind) {
      case PerturbationKind::kGaussianNoise:
        specs.push_back(PerturbationSpec::gaussian(snr_db, seed));
        break;
      case PerturbationKind::kSilence:
        specs.push_back(PerturbationSpec::silence());
        break;
      case PerturbationKind::kTemporalShift:
        specs.push_back(PerturbationSpec::shift(shift_s));
        break;
    }
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return PerturbationSet(std::move(specs));
}

PerturbationSet PerturbationSet::reseeded(std::uint64_t base_seed) const {
  auto specs = specs_;
  for (std::size_t k = 0; k < specs.size(); ++k) specs[k].seed += base_seed + k;
  return PerturbationSet(std::move(specs));
}

std::string PerturbationSet::label() const {
  std::string out;
  for (const auto& s : specs_) {
    if (!out.empty()) out += '+';
    switch (s.kind) {
      case PerturbationKind::kGaussianNoise:
        out += "gaussian";
        break;
      case PerturbationKind::kSilence:
        out += "silence";
        break;
      case PerturbationKind::kTemporalShift:
        out += "shift";
        break;
    }
  }
  return out;
}

double noise_sigma(const Waveform& w, double snr_db) {
  double power = 0.0;
  for (float s : w.samples) power += static_cast<double>(s) * s;
  if (!w.empty()) power /= static_cast<double>(w.size());
  if (power <= 0.0) return kZeroPowerSigma;
  return std::sqrt(power / std::pow(10.0, snr_db / 10.0));
}

Waveform gaussian_noise(const Waveform& w, double snr_db, std::uint64_t seed) {
  if (!std::isfinite(snr_db)) throw std::invalid_argument("snr_db must be finite");
  if (w.empty()) throw std::invalid_argument("gaussian_noise needs a non-empty waveform");
  const double sigma = noise_sigma(w, snr_db);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  Waveform out = w;
  for (float& s : out.samples) s = static_cast<float>(s + gauss(rng));
  return out;
}

Waveform silence(const Waveform& w) {
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(w.size(), 0.0f);
  return out;
}

Waveform temporal_shift(const Waveform& w, double shift_s) {
  if (!(std::isfinite(shift_s) && shift_s >= 0.0)) {
    throw std::invalid_argument("shift_s must be finite and >= 0");
  }
  // llround rounds half away from zero.
  const auto drop = static_cast<std::size_t>(
      std::min<long long>(std::llround(shift_s * w.sample_rate),
                          static_cast<long long>(w.size())));
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(w.size(), 0.0f);
  std::copy(w.samples.begin() + static_cast<std::ptrdiff_t>(drop),
            w.samples.end(), out.samples.begin());
  return out;
}

Waveform apply(const Waveform& w, const PerturbationSpec& spec) {
  switch (spec.kind) {
    case PerturbationKind::kGaussianNoise:
      return gaussian_noise(w, spec.snr_db, spec.seed);
    case PerturbationKind::kSilence:
      return silence(w);
    case PerturbationKind::kTemporalShift:
      return temporal_shift(w, spec.shift_s);
  }
  throw std::logic_error("unhandled perturbation kind");
}

std::vector<Waveform> apply_set(const Waveform& w, const PerturbationSet& set) {
  std::vector<Waveform> out;
  out.reserve(set.size());
  for (const auto& spec : set.specs()) out.push_back(apply(w, spec));
  return out;
}

}  // namespace cdasr
