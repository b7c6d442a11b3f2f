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

#ifndef CDASR_AUDIO_H_
#define CDASR_AUDIO_H_

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdasr {

class AudioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mono float waveform. Samples are nominally in [-1, 1] but perturbed
// waveforms may exceed that range.
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }

  // Throws AudioError if sample_rate <= 0 or any sample is non-finite.
  void validate() const;

  bool operator==(const Waveform&) const = default;
};

// Fixed-length window of a longer recording.
struct Segment {
  Waveform waveform;
  std::size_t index = 0;
  double source_offset_s = 0.0;
  // Number of samples that came from the source (the rest is zero padding).
  std::size_t valid_samples = 0;
};

// Reads a 16-bit PCM mono RIFF/WAVE file. Samples are scaled by 1/32768.
Waveform load_waveform(const std::filesystem::path& path);

// Writes a 16-bit PCM mono RIFF/WAVE file. Samples outside [-1, 1) are
// clipped to the 16-bit range.
void save_waveform(const std::filesystem::path& path, const Waveform& w);

// Number of samples in segment_len_s seconds at `sample_rate`.
std::size_t segment_samples(double segment_len_s, int sample_rate);

// Splits into ceil(duration / segment_len_s) segments with stride equal to
// the segment length. The last segment is zero-padded to full length.
std::vector<Segment> segmentize(const Waveform& w, double segment_len_s);

}  // namespace cdasr

#endif  // CDASR_AUDIO_H_
