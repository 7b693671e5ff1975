// Copyright 2026 The streamanon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "streamanon/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace streamanon {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct WavInfo {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  std::uint32_t data_bytes = 0;
  std::streamoff data_offset = 0;
};

template <typename T>
T read_le(const unsigned char* p) {
  T v{};
  std::memcpy(&v, p, sizeof(T));
  return v;
}

WavInfo parse_header(std::ifstream& in, const std::filesystem::path& path) {
  auto fail = [&](const std::string& why) {
    return DataError(path.string() + ": " + why);
  };
  unsigned char riff[12];
  if (!in.read(reinterpret_cast<char*>(riff), 12) ||
      std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(riff + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }
  WavInfo info;
  bool have_fmt = false;
  unsigned char hdr[8];
  while (in.read(reinterpret_cast<char*>(hdr), 8)) {
    const auto size = read_le<std::uint32_t>(hdr + 4);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      std::vector<unsigned char> fmt(size);
      if (size < 16 || !in.read(reinterpret_cast<char*>(fmt.data()), size)) {
        throw fail("truncated fmt chunk");
      }
      info.format = read_le<std::uint16_t>(fmt.data());
      info.channels = read_le<std::uint16_t>(fmt.data() + 2);
      info.sample_rate = read_le<std::uint32_t>(fmt.data() + 4);
      info.bits = read_le<std::uint16_t>(fmt.data() + 14);
      if (info.format == kFormatExtensible && size >= 26) {
        info.format = read_le<std::uint16_t>(fmt.data() + 24);
      }
      if (size % 2) in.ignore(1);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      info.data_bytes = size;
      info.data_offset = in.tellg();
      break;
    } else {
      in.ignore(size + (size % 2));
    }
  }
  if (!have_fmt || info.data_offset == 0) throw fail("missing fmt or data chunk");
  if (info.channels != 1) {
    throw fail("only mono audio is supported, file has " +
               std::to_string(info.channels) + " channels");
  }
  const bool pcm16 = info.format == kFormatPcm && info.bits == 16;
  const bool f32 = info.format == kFormatFloat && info.bits == 32;
  if (!pcm16 && !f32) {
    throw fail("unsupported encoding (format " + std::to_string(info.format) +
               ", " + std::to_string(info.bits) +
               " bits); expected 16-bit PCM or 32-bit float");
  }
  return info;
}

void put_u16(std::string& s, std::uint16_t v) {
  s.append(reinterpret_cast<const char*>(&v), 2);
}
void put_u32(std::string& s, std::uint32_t v) {
  s.append(reinterpret_cast<const char*>(&v), 4);
}

}  // namespace

AudioChunk read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const WavInfo info = parse_header(in, path);
  const std::size_t bytes_per_sample = info.bits / 8;
  const std::size_t count = info.data_bytes / bytes_per_sample;
  std::vector<unsigned char> raw(count * bytes_per_sample);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw DataError(path.string() + ": truncated data chunk");
  }
  AudioChunk out;
  out.sample_rate = static_cast<int>(info.sample_rate);
  out.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (info.bits == 16) {
      out.samples[i] =
          static_cast<float>(read_le<std::int16_t>(&raw[2 * i])) / 32768.0f;
    } else {
      out.samples[i] = read_le<float>(&raw[4 * i]);
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioChunk& audio,
               WavEncoding encoding) {
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(audio.samples.size() * (bits / 8));
  std::string buf;
  buf.reserve(44 + data_bytes);
  buf += "RIFF";
  put_u32(buf, 36 + data_bytes);
  buf += "WAVEfmt ";
  put_u32(buf, 16);
  put_u16(buf, pcm ? kFormatPcm : kFormatFloat);
  put_u16(buf, 1);
  put_u32(buf, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(buf, static_cast<std::uint32_t>(audio.sample_rate) * (bits / 8));
  put_u16(buf, bits / 8);
  put_u16(buf, bits);
  buf += "data";
  put_u32(buf, data_bytes);
  for (float s : audio.samples) {
    if (pcm) {
      // Same 1/32768 scale as the reader; +1.0 saturates at the top code.
      const auto q = static_cast<std::int16_t>(
          std::clamp(std::lround(static_cast<double>(s) * 32768.0), -32768L, 32767L));
      buf.append(reinterpret_cast<const char*>(&q), 2);
    } else {
      buf.append(reinterpret_cast<const char*>(&s), 4);
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

double wav_duration_seconds(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const WavInfo info = parse_header(in, path);
  return static_cast<double>(info.data_bytes) / (info.bits / 8) /
         info.sample_rate;
}

}  // namespace streamanon
