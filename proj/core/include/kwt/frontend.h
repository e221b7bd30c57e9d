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

#include <cstdint>
#include <complex>
#include <filesystem>

#include "kwt/audio.h"
#include "kwt/tensor.h"

namespace kwt {

struct FrontendConfig {
  int sample_rate = kSampleRate;
  double window_ms = 30.0;
  double stride_ms = 10.0;
  int num_mel_bins = 40;
  int num_features = 40;  // DCT coefficients kept
  int fft_size = 512;
  double lower_hz = 20.0;
  double upper_hz = 7600.0;
  double log_floor = 1e-12;
  // Inputs are padded/truncated to this many samples; 0 keeps the length.
  std::size_t clip_samples = kClipSamples;

  std::size_t window_length() const;
  std::size_t hop_length() const;
};

// T×F MFCC matrix, one row per analysis frame.
struct Spectrogram {
  Tensor<float> values;
  int sample_rate = kSampleRate;
  double window_ms = 30.0;
  double stride_ms = 10.0;

  std::size_t frames() const { return values.dim(0); }
  std::size_t features() const { return values.dim(1); }
};

// floor((n − window)/hop) + 1 with window/hop derived from milliseconds.
std::int64_t frame_count(std::int64_t n_samples, double window_ms,
                         double stride_ms, int sample_rate);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// [fft_size/2 + 1, num_mel_bins] triangular HTK-mel weights.
Tensor<double> mel_filterbank(const FrontendConfig& cfg);

// Orthonormal DCT-II basis, [n, n]; row k holds coefficient k.
Tensor<double> dct_matrix(std::size_t n);

// Precomputes the window, filterbank and DCT basis once; `compute` is const
// and may be called concurrently.
class MfccExtractor {
 public:
  explicit MfccExtractor(FrontendConfig cfg = {});

  Spectrogram compute(const Waveform& w) const;
  // Linear mel-filterbank energies [T, num_mel_bins] before the log/DCT.
  Tensor<double> mel_energies(const Waveform& w) const;

  const FrontendConfig& config() const { return cfg_; }
  const Tensor<double>& filterbank() const { return filterbank_; }

 private:
  std::vector<float> prepare(const Waveform& w) const;

  FrontendConfig cfg_;
  std::vector<double> window_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;  // exp(-2πik/N), k < N/2
  Tensor<double> filterbank_;
  // Non-zero filter columns [lo, hi) of each FFT bin.
  std::vector<std::pair<std::size_t, std::size_t>> active_;
  Tensor<double> dct_;
};

// compute_mfcc with the default configuration shares a process-wide
// extractor.
Spectrogram compute_mfcc(const Waveform& w);
Spectrogram compute_mfcc(const Waveform& w, const FrontendConfig& cfg);

// One CSV row per time frame.
void write_spectrogram_csv(const std::filesystem::path& path,
                           const Spectrogram& s);

}  // namespace kwt
