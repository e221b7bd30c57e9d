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

#pragma once

#include <filesystem>
#include <vector>

namespace kwt {

inline constexpr int kSampleRate = 16000;
inline constexpr std::size_t kClipSamples = 16000;

struct Waveform {
  std::vector<float> samples;  // in [-1, 1]
  int sample_rate = kSampleRate;

  std::size_t size() const { return samples.size(); }
};

// Zero-pads or truncates to exactly `n` samples.
Waveform fit_length(Waveform w, std::size_t n = kClipSamples);

// PCM 16-bit little-endian mono. Throws InputError on malformed or
// unsupported content and IoError when the file cannot be opened.
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& w);

}  // namespace kwt
