/* Copyright 2026 The KWT Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "kwt/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "kwt/error.h"

namespace kwt {

Waveform fit_length(Waveform w, std::size_t n) {
  w.samples.resize(n, 0.0f);
  return w;
}

namespace {

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw InputError("not a RIFF/WAVE file" + where);
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size() && std::memcmp(chunk, "data", 4) != 0) {
      throw InputError("truncated chunk" + where);
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw InputError("short fmt chunk" + where);
      format = le16(bytes.data() + body);
      channels = le16(bytes.data() + body + 2);
      rate = le32(bytes.data() + body + 4);
      bits = le16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw InputError("data chunk before fmt chunk" + where);
      if (format != 1 || channels != 1 || bits != 16) {
        throw InputError("only 16-bit PCM mono is supported" + where);
      }
      if (rate != static_cast<std::uint32_t>(kSampleRate)) {
        throw InputError("sample rate " + std::to_string(rate) +
                         " Hz is not supported" + where);
      }
      // Tolerate a data length that overruns the file (common in streamed
      // recordings) by reading what is present.
      const std::size_t avail = std::min<std::size_t>(len, bytes.size() - body);
      Waveform w;
      w.sample_rate = static_cast<int>(rate);
      w.samples.resize(avail / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto s =
            static_cast<std::int16_t>(le16(bytes.data() + body + 2 * i));
        w.samples[i] = static_cast<float>(s) / 32768.0f;
      }
      return w;
    }
    pos = body + len + (len & 1u);
  }
  throw InputError("no data chunk" + where);
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  std::string out;
  const auto data_len = static_cast<std::uint32_t>(w.samples.size() * 2);
  out.append("RIFF");
  put32(out, 36 + data_len);
  out.append("WAVEfmt ");
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(w.sample_rate));
  put32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out.append("data");
  put32(out, data_len);
  for (float s : w.samples) {
    const float c = std::clamp(s, -1.0f, 1.0f);
    const auto v = static_cast<std::int16_t>(
        std::lround(std::min(c * 32768.0f, 32767.0f)));
    put16(out, static_cast<std::uint16_t>(v));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write WAV file " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write to " + path.string());
}

}  // namespace kwt
