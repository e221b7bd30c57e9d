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

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "kwt/error.h"

namespace kwt {

namespace {

// In-place iterative radix-2 FFT with precomputed bit reversal and
// twiddles; size must be a power of two.
void fft(std::vector<std::complex<double>>& a, const std::vector<std::size_t>& bitrev,
         const std::vector<std::complex<double>>& twiddle) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    if (i < bitrev[i]) std::swap(a[i], a[bitrev[i]]);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2, step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> w = twiddle[k * step];
        const std::complex<double> b = a[i + k + half];
        // Explicit product; std::complex multiplication adds NaN recovery.
        const std::complex<double> v(b.real() * w.real() - b.imag() * w.imag(),
                                     b.real() * w.imag() + b.imag() * w.real());
        const std::complex<double> u = a[i + k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

std::size_t FrontendConfig::window_length() const {
  return static_cast<std::size_t>(std::lround(sample_rate * window_ms / 1000.0));
}

std::size_t FrontendConfig::hop_length() const {
  return static_cast<std::size_t>(std::lround(sample_rate * stride_ms / 1000.0));
}

std::int64_t frame_count(std::int64_t n_samples, double window_ms,
                         double stride_ms, int sample_rate) {
  if (!(stride_ms > 0)) throw ConfigError("frame stride must be positive");
  if (!(window_ms > 0)) throw ConfigError("frame window must be positive");
  if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
  const auto window = std::lround(sample_rate * window_ms / 1000.0);
  const auto hop = std::lround(sample_rate * stride_ms / 1000.0);
  if (hop <= 0) throw ConfigError("frame stride is shorter than one sample");
  if (n_samples < window) {
    throw InputError("signal of " + std::to_string(n_samples) +
                     " samples is shorter than one window");
  }
  return (n_samples - window) / hop + 1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Tensor<double> mel_filterbank(const FrontendConfig& cfg) {
  if (cfg.num_mel_bins <= 0) throw ConfigError("num_mel_bins must be > 0");
  if (!(cfg.lower_hz >= 0 && cfg.lower_hz < cfg.upper_hz &&
        cfg.upper_hz <= cfg.sample_rate / 2.0)) {
    throw ConfigError("mel edges must satisfy 0 <= lower < upper <= nyquist");
  }
  const std::size_t bins = static_cast<std::size_t>(cfg.fft_size / 2 + 1);
  const std::size_t m = static_cast<std::size_t>(cfg.num_mel_bins);
  const double lo = hz_to_mel(cfg.lower_hz), hi = hz_to_mel(cfg.upper_hz);
  std::vector<double> edges(m + 2);
  for (std::size_t i = 0; i < m + 2; ++i)
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m + 1);

  Tensor<double> fb(Shape{bins, m});
  for (std::size_t k = 0; k < bins; ++k) {
    const double hz = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
    const double mel = hz_to_mel(hz);
    for (std::size_t j = 0; j < m; ++j) {
      const double left = edges[j], center = edges[j + 1], right = edges[j + 2];
      double w = 0.0;
      if (mel > left && mel <= center) {
        w = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        w = (right - mel) / (right - center);
      }
      fb.at(k, j) = w;
    }
  }
  return fb;
}

Tensor<double> dct_matrix(std::size_t n) {
  Tensor<double> d(Shape{n, n});
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / nn) : std::sqrt(2.0 / nn);
    for (std::size_t i = 0; i < n; ++i) {
      d.at(k, i) = scale * std::cos(std::numbers::pi / nn *
                                    (static_cast<double>(i) + 0.5) *
                                    static_cast<double>(k));
    }
  }
  return d;
}

MfccExtractor::MfccExtractor(FrontendConfig cfg) : cfg_(cfg) {
  if (cfg_.sample_rate != kSampleRate) {
    throw ConfigError("only 16 kHz input is supported");
  }
  if (!is_pow2(cfg_.fft_size)) throw ConfigError("fft_size must be a power of two");
  const std::size_t win = cfg_.window_length();
  if (win == 0 || win > static_cast<std::size_t>(cfg_.fft_size)) {
    throw ConfigError("window length must lie in (0, fft_size]");
  }
  if (cfg_.num_features <= 0 || cfg_.num_features > cfg_.num_mel_bins) {
    throw ConfigError("num_features must lie in [1, num_mel_bins]");
  }
  window_.resize(win);
  // Periodic Hann.
  for (std::size_t i = 0; i < win; ++i) {
    window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                      static_cast<double>(i) /
                                      static_cast<double>(win));
  }
  const std::size_t nfft = static_cast<std::size_t>(cfg_.fft_size);
  bitrev_.assign(nfft, 0);
  for (std::size_t i = 1, j = 0; i < nfft; ++i) {
    std::size_t bit = nfft >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    bitrev_[i] = j;
  }
  twiddle_.resize(nfft / 2);
  for (std::size_t k = 0; k < nfft / 2; ++k) {
    twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                      static_cast<double>(nfft));
  }
  filterbank_ = mel_filterbank(cfg_);
  active_.assign(filterbank_.dim(0), {0, 0});
  for (std::size_t k = 0; k < filterbank_.dim(0); ++k) {
    std::size_t lo = filterbank_.dim(1), hi = 0;
    for (std::size_t m = 0; m < filterbank_.dim(1); ++m) {
      if (filterbank_.at(k, m) != 0.0) {
        lo = std::min(lo, m);
        hi = m + 1;
      }
    }
    if (hi > 0) active_[k] = {lo, hi};
  }
  dct_ = dct_matrix(static_cast<std::size_t>(cfg_.num_mel_bins));
}

std::vector<float> MfccExtractor::prepare(const Waveform& w) const {
  if (w.samples.empty()) throw InputError("empty waveform");
  if (w.sample_rate != cfg_.sample_rate) {
    throw InputError("waveform sample rate " + std::to_string(w.sample_rate) +
                     " Hz is not supported");
  }
  std::vector<float> x = w.samples;
  if (cfg_.clip_samples > 0) x.resize(cfg_.clip_samples, 0.0f);
  return x;
}

Tensor<double> MfccExtractor::mel_energies(const Waveform& w) const {
  const std::vector<float> x = prepare(w);
  const std::size_t win = cfg_.window_length(), hop = cfg_.hop_length();
  const auto frames = static_cast<std::size_t>(frame_count(
      static_cast<std::int64_t>(x.size()), cfg_.window_ms, cfg_.stride_ms,
      cfg_.sample_rate));
  const std::size_t nfft = static_cast<std::size_t>(cfg_.fft_size);
  const std::size_t bins = nfft / 2 + 1;
  const std::size_t mels = static_cast<std::size_t>(cfg_.num_mel_bins);

  Tensor<double> out(Shape{frames, mels});
  std::vector<std::complex<double>> buf(nfft);
  std::vector<double> mag(bins);
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < win; ++i)
      buf[i] = static_cast<double>(x[t * hop + i]) * window_[i];
    fft(buf, bitrev_, twiddle_);
    for (std::size_t k = 0; k < bins; ++k)
      mag[k] = std::sqrt(buf[k].real() * buf[k].real() + buf[k].imag() * buf[k].imag());
    for (std::size_t k = 0; k < bins; ++k) {
      const double mk = mag[k];
      const auto [lo, hi] = active_[k];
      if (mk == 0.0 || lo >= hi) continue;
      const double* fbrow = filterbank_.values().data() + k * mels;
      double* orow = out.values().data() + t * mels;
      for (std::size_t j = lo; j < hi; ++j) orow[j] += mk * fbrow[j];
    }
  }
  return out;
}

Spectrogram MfccExtractor::compute(const Waveform& w) const {
  const Tensor<double> energies = mel_energies(w);
  const std::size_t frames = energies.dim(0);
  const std::size_t mels = energies.dim(1);
  const std::size_t feats = static_cast<std::size_t>(cfg_.num_features);
  Spectrogram s;
  s.sample_rate = cfg_.sample_rate;
  s.window_ms = cfg_.window_ms;
  s.stride_ms = cfg_.stride_ms;
  s.values = Tensor<float>(Shape{frames, feats});
  std::vector<double> logmel(mels);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t j = 0; j < mels; ++j)
      logmel[j] = std::log(std::max(energies.at(t, j), cfg_.log_floor));
    for (std::size_t k = 0; k < feats; ++k) {
      double acc = 0.0;
      const double* drow = dct_.values().data() + k * mels;
      for (std::size_t j = 0; j < mels; ++j) acc += drow[j] * logmel[j];
      s.values.at(t, k) = static_cast<float>(acc);
    }
  }
  return s;
}

Spectrogram compute_mfcc(const Waveform& w) {
  static const MfccExtractor extractor{FrontendConfig{}};
  return extractor.compute(w);
}

Spectrogram compute_mfcc(const Waveform& w, const FrontendConfig& cfg) {
  return MfccExtractor(cfg).compute(w);
}

void write_spectrogram_csv(const std::filesystem::path& path,
                           const Spectrogram& s) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(9);
  for (std::size_t t = 0; t < s.frames(); ++t) {
    for (std::size_t f = 0; f < s.features(); ++f) {
      if (f) out << ',';
      out << s.values.at(t, f);
    }
    out << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace kwt
