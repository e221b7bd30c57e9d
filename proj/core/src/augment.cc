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

#include "kwt/augment.h"

#include <algorithm>
#include <cmath>

#include "kwt/error.h"

namespace kwt {

AugmentPolicy AugmentPolicy::none() {
  AugmentPolicy p;
  p.time_shift_ms = {0.0, 0.0};
  p.resample_factor = {1.0, 1.0};
  p.background_volume = 0.0;
  p.n_time_masks = 0;
  p.time_mask_size = {0, 0};
  p.n_freq_masks = 0;
  p.freq_mask_size = {0, 0};
  return p;
}

void AugmentPolicy::validate() const {
  if (time_shift_ms.lo > time_shift_ms.hi) {
    throw ConfigError("augment: time_shift_ms range is inverted");
  }
  if (!(resample_factor.lo > 0.0) || resample_factor.lo > resample_factor.hi) {
    throw ConfigError("augment: resample_factor must be a positive range");
  }
  if (background_volume < 0.0) {
    throw ConfigError("augment: background_volume must be >= 0");
  }
  if (n_time_masks < 0 || n_freq_masks < 0) {
    throw ConfigError("augment: mask counts must be >= 0");
  }
  if (time_mask_size.lo < 0 || time_mask_size.lo > time_mask_size.hi ||
      freq_mask_size.lo < 0 || freq_mask_size.lo > freq_mask_size.hi) {
    throw ConfigError("augment: mask sizes must be non-negative ranges");
  }
}

namespace {

std::vector<float> time_shift(const std::vector<float>& x, long shift) {
  if (shift == 0) return x;
  const long n = static_cast<long>(x.size());
  std::vector<float> out(x.size(), 0.0f);
  for (long i = 0; i < n; ++i) {
    const long src = i - shift;
    if (src >= 0 && src < n) out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(src)];
  }
  return out;
}

// Stretches the signal by `factor` (output length floor(n·factor)) with
// linear interpolation, then pads/truncates back to n.
std::vector<float> resample(const std::vector<float>& x, double factor) {
  if (factor == 1.0) return x;
  const std::size_t n = x.size();
  const auto stretched = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * factor));
  std::vector<float> out(n, 0.0f);
  const std::size_t m = std::min(n, stretched);
  for (std::size_t j = 0; j < m; ++j) {
    const double pos = static_cast<double>(j) / factor;
    const auto i0 = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i0);
    if (i0 + 1 < n) {
      out[j] = static_cast<float>((1.0 - frac) * x[i0] + frac * x[i0 + 1]);
    } else if (i0 < n) {
      out[j] = x[i0];
    }
  }
  return out;
}

Stripe draw_stripe(std::size_t axis, IntRange size, Rng& rng) {
  const int hi = std::min<int>(size.hi, static_cast<int>(axis));
  const int lo = std::min(size.lo, hi);
  const auto width = static_cast<std::size_t>(rng.uniform_int(lo, hi));
  const auto start = static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(axis - width)));
  return {start, width};
}

}  // namespace

Waveform augment_waveform(const Waveform& w,
                          std::span<const Waveform> noise_pool,
                          const AugmentPolicy& policy, Rng& rng) {
  Waveform out;
  out.sample_rate = w.sample_rate;

  const double shift_ms =
      rng.uniform(policy.time_shift_ms.lo, policy.time_shift_ms.hi);
  const long shift = std::lround(shift_ms * w.sample_rate / 1000.0);
  out.samples = time_shift(w.samples, shift);

  const double factor =
      rng.uniform(policy.resample_factor.lo, policy.resample_factor.hi);
  out.samples = resample(out.samples, factor);

  if (!noise_pool.empty() && policy.background_volume > 0.0) {
    const auto which = static_cast<std::size_t>(rng.uniform_int(
        0, static_cast<std::int64_t>(noise_pool.size()) - 1));
    const Waveform& noise = noise_pool[which];
    const double volume = rng.uniform(0.0, policy.background_volume);
    if (!noise.samples.empty()) {
      const std::size_t n = out.samples.size();
      const std::size_t span = noise.samples.size() > n ? noise.samples.size() - n : 0;
      const auto offset = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(span)));
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = offset + i;
        if (k >= noise.samples.size()) break;
        out.samples[i] += static_cast<float>(volume * noise.samples[k]);
      }
    }
  }
  for (float& s : out.samples) s = std::clamp(s, -1.0f, 1.0f);
  return out;
}

MaskPlan draw_masks(std::size_t frames, std::size_t features,
                    const AugmentPolicy& policy, Rng& rng) {
  MaskPlan plan;
  for (int i = 0; i < policy.n_time_masks; ++i)
    plan.time.push_back(draw_stripe(frames, policy.time_mask_size, rng));
  for (int i = 0; i < policy.n_freq_masks; ++i)
    plan.freq.push_back(draw_stripe(features, policy.freq_mask_size, rng));
  return plan;
}

Spectrogram apply_masks(Spectrogram s, const MaskPlan& plan) {
  const std::size_t frames = s.frames(), features = s.features();
  for (const Stripe& st : plan.time) {
    for (std::size_t t = st.start; t < std::min(frames, st.start + st.width); ++t)
      for (std::size_t f = 0; f < features; ++f) s.values.at(t, f) = 0.0f;
  }
  for (const Stripe& st : plan.freq) {
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t f = st.start; f < std::min(features, st.start + st.width); ++f)
        s.values.at(t, f) = 0.0f;
  }
  return s;
}

Spectrogram spec_augment(const Spectrogram& s, const AugmentPolicy& policy,
                         Rng& rng) {
  return apply_masks(s, draw_masks(s.frames(), s.features(), policy, rng));
}

}  // namespace kwt
