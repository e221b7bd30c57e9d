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

#include "kwt/frontend.h"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "kwt/audio.h"
#include "kwt/error.h"
#include "kwt/random.h"
#include "test_support.h"

namespace kwt {
namespace {

Waveform sine(double hz, std::size_t n = kClipSamples, double amp = 0.5) {
  Waveform w;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    w.samples[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz *
                                                     static_cast<double>(i) / kSampleRate));
  return w;
}

TEST(FrameCount, FloorFormula) {
  EXPECT_EQ(frame_count(16000, 30, 10, 16000), 98);
  EXPECT_EQ(frame_count(480, 30, 10, 16000), 1);
  EXPECT_EQ(frame_count(16160, 30, 10, 16000), 99);
  EXPECT_THROW(frame_count(16000, 30, 0, 16000), ConfigError);
  EXPECT_THROW(frame_count(16000, 30, -5, 16000), ConfigError);
  EXPECT_THROW(frame_count(100, 30, 10, 16000), InputError);
}

TEST(Mfcc, OneSecondGives98By40) {
  Rng rng(1);
  Waveform w;
  w.samples.resize(kClipSamples);
  for (float& s : w.samples) s = static_cast<float>(rng.uniform(-0.5, 0.5));
  const Spectrogram s = compute_mfcc(w);
  EXPECT_EQ(s.frames(), 98u);
  EXPECT_EQ(s.features(), 40u);
  EXPECT_TRUE(s.values.all_finite());
}

TEST(Mfcc, ShortAndLongInputsAreFittedToOneSecond) {
  EXPECT_EQ(compute_mfcc(sine(440, 9000)).frames(), 98u);
  EXPECT_EQ(compute_mfcc(sine(440, 23000)).frames(), 98u);
  FrontendConfig keep;
  keep.clip_samples = 0;
  EXPECT_EQ(compute_mfcc(sine(440, 16160), keep).frames(), 99u);
}

TEST(Mfcc, SilenceGivesIdenticalFrames) {
  Waveform w;
  w.samples.assign(kClipSamples, 0.0f);
  const Spectrogram s = compute_mfcc(w);
  for (std::size_t t = 1; t < s.frames(); ++t)
    for (std::size_t f = 0; f < s.features(); ++f)
      EXPECT_EQ(s.values.at(t, f), s.values.at(0, f));
  // log(1e-12) in every mel bin concentrates all energy in c0.
  EXPECT_NEAR(s.values.at(0, 0), std::log(1e-12) * std::sqrt(40.0), 1e-3);
  for (std::size_t f = 1; f < s.features(); ++f) EXPECT_NEAR(s.values.at(0, f), 0.0, 1e-3);
}

TEST(Mfcc, SteadySineIsStationaryAndPeaksAtItsFilter) {
  const Waveform w = sine(1000.0);
  const Spectrogram s = compute_mfcc(w);
  for (std::size_t t = 1; t + 1 < s.frames(); ++t)
    for (std::size_t f = 0; f < s.features(); ++f)
      EXPECT_NEAR(s.values.at(t, f), s.values.at(1, f), 1e-3);

  const FrontendConfig cfg;
  const double lo = hz_to_mel(cfg.lower_hz), hi = hz_to_mel(cfg.upper_hz);
  std::size_t expected = 0;
  double best = 1e300;
  for (int m = 0; m < cfg.num_mel_bins; ++m) {
    const double centre = mel_to_hz(lo + (hi - lo) * (m + 1) / (cfg.num_mel_bins + 1));
    if (std::abs(centre - 1000.0) < best) {
      best = std::abs(centre - 1000.0);
      expected = static_cast<std::size_t>(m);
    }
  }
  const MfccExtractor extractor;
  const Tensor<double> mel = extractor.mel_energies(w);
  for (std::size_t t = 0; t < mel.rows(); t += 17) {
    std::size_t peak = 0;
    for (std::size_t m = 1; m < mel.cols(); ++m)
      if (mel.at(t, m) > mel.at(t, peak)) peak = m;
    EXPECT_EQ(peak, expected) << "frame " << t;
  }
}

TEST(Mfcc, MelEnergiesMatchDirectDft) {
  Rng rng(3);
  Waveform w;
  w.samples.resize(kClipSamples);
  for (float& s : w.samples) s = static_cast<float>(rng.uniform(-1.0, 1.0));
  const MfccExtractor extractor;
  const Tensor<double> mel = extractor.mel_energies(w);
  const Tensor<double>& fb = extractor.filterbank();
  for (std::size_t frame : {0u, 50u, 97u}) {
    std::vector<double> mag(257);
    for (std::size_t k = 0; k < 257; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t n = 0; n < 480; ++n) {
        const double win = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / 480.0);
        acc += win * static_cast<double>(w.samples[frame * 160 + n]) *
               std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n) / 512.0);
      }
      mag[k] = std::abs(acc);
    }
    for (std::size_t m = 0; m < 40; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < 257; ++k) e += mag[k] * fb.at(k, m);
      EXPECT_NEAR(mel.at(frame, m), e, 1e-4 * std::max(1.0, e)) << frame << "," << m;
    }
  }
}

TEST(Mfcc, DeterministicAndRejectsBadInput) {
  const Waveform w = sine(700);
  EXPECT_EQ(compute_mfcc(w).values, compute_mfcc(w).values);
  EXPECT_THROW(compute_mfcc(Waveform{}), InputError);
  Waveform wrong = w;
  wrong.sample_rate = 8000;
  EXPECT_THROW(compute_mfcc(wrong), InputError);
}

TEST(Dct, Orthonormal) {
  const Tensor<double> m = dct_matrix(40);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 40; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < 40; ++k) dot += m.at(k, i) * m.at(k, j);
      EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-6);
    }
}

TEST(Filterbank, NonNegativeAndAtMostTwoFiltersPerBin) {
  const Tensor<double> fb = mel_filterbank(FrontendConfig{});
  ASSERT_EQ(fb.dim(0), 257u);
  ASSERT_EQ(fb.dim(1), 40u);
  for (std::size_t k = 0; k < 257; ++k) {
    int active = 0;
    for (std::size_t m = 0; m < 40; ++m) {
      EXPECT_GE(fb.at(k, m), 0.0);
      active += fb.at(k, m) > 0.0;
    }
    EXPECT_LE(active, 2) << "bin " << k;
  }
  for (std::size_t m = 0; m < 40; ++m) {
    double peak = 0.0;
    for (std::size_t k = 0; k < 257; ++k) peak = std::max(peak, fb.at(k, m));
    EXPECT_GT(peak, 0.0) << "filter " << m << " is empty";
    EXPECT_LE(peak, 1.0);
  }
}

TEST(Mel, HtkFormulaRoundTrip) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  for (double hz : {20.0, 440.0, 1000.0, 7600.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
}

TEST(Wav, RoundTripAndErrors) {
  testing::TempDir dir("wav");
  Waveform w = sine(300, 1234, 0.8);
  write_wav(dir / "a.wav", w);
  const Waveform r = read_wav(dir / "a.wav");
  ASSERT_EQ(r.samples.size(), w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) EXPECT_NEAR(r.samples[i], w.samples[i], 1.0 / 32767);
  EXPECT_THROW(read_wav(dir / "missing.wav"), IoError);
  {
    std::ofstream junk(dir / "junk.wav", std::ios::binary);
    junk << "definitely not a riff file";
  }
  EXPECT_THROW(read_wav(dir / "junk.wav"), InputError);
}

TEST(Wav, FitLength) {
  Waveform w = sine(300, 10);
  EXPECT_EQ(fit_length(w, 16).samples.size(), 16u);
  EXPECT_EQ(fit_length(w, 16).samples[12], 0.0f);
  EXPECT_EQ(fit_length(w, 4).samples.size(), 4u);
}

}  // namespace
}  // namespace kwt
