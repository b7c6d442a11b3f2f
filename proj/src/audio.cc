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

#include "cdasr/audio.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace cdasr {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

void Waveform::validate() const {
  if (sample_rate <= 0) {
    throw AudioError("invalid sample rate " + std::to_string(sample_rate));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw AudioError("non-finite sample at index " + std::to_string(i));
    }
  }
}

Waveform load_waveform(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw AudioError("cannot open " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw AudioError(where + "not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t chunk_size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (chunk_size > bytes.size() - body) {
      throw AudioError(where + "truncated chunk");
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw AudioError(where + "short fmt chunk");
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw AudioError(where + "data chunk before fmt chunk");
      if (channels != 1) throw AudioError(where + "non-mono input");
      if (format != 1 || bits != 16) {
        throw AudioError(where + "unsupported encoding (need 16-bit PCM)");
      }
      if (rate == 0) throw AudioError(where + "invalid sample rate 0");
      Waveform w;
      w.sample_rate = static_cast<int>(rate);
      w.samples.resize(chunk_size / 2);
      const unsigned char* p = bytes.data() + body;
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(read_u16(p + 2 * i));
        w.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return w;
    }
    pos = body + chunk_size + (chunk_size & 1);
  }
  throw AudioError(where + "missing data chunk");
}

void save_waveform(const std::filesystem::path& path, const Waveform& w) {
  w.validate();
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  put_u32(out, 36 + data_bytes);
  out.append("WAVEfmt ");
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.append("data");
  put_u32(out, data_bytes);
  for (float s : w.samples) {
    const double scaled = std::clamp(std::round(static_cast<double>(s) * 32768.0),
                                     -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw AudioError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw AudioError("write failed for " + path.string());
}

std::size_t segment_samples(double segment_len_s, int sample_rate) {
  return static_cast<std::size_t>(std::llround(segment_len_s * sample_rate));
}

std::vector<Segment> segmentize(const Waveform& w, double segment_len_s) {
  if (!(segment_len_s > 0.0)) {
    throw std::invalid_argument("segment length must be positive");
  }
  const std::size_t len = segment_samples(segment_len_s, w.sample_rate);
  if (len == 0) throw std::invalid_argument("segment shorter than one sample");

  std::vector<Segment> out;
  const std::size_t count = (w.size() + len - 1) / len;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Segment seg;
    seg.index = i;
    seg.source_offset_s = static_cast<double>(i) * segment_len_s;
    seg.waveform.sample_rate = w.sample_rate;
    seg.waveform.samples.assign(len, 0.0f);
    const std::size_t begin = i * len;
    const std::size_t end = std::min(begin + len, w.size());
    std::copy(w.samples.begin() + static_cast<std::ptrdiff_t>(begin),
              w.samples.begin() + static_cast<std::ptrdiff_t>(end),
              seg.waveform.samples.begin());
    seg.valid_samples = end - begin;
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace cdasr
