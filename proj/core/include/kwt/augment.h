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

#include <span>
#include <vector>

#include "kwt/audio.h"
#include "kwt/frontend.h"
#include "kwt/random.h"

namespace kwt {

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Waveform and SpecAugment policy. All ranges are inclusive.
struct AugmentPolicy {
  RealRange time_shift_ms{-100.0, 100.0};
  RealRange resample_factor{0.85, 1.15};
  double background_volume = 0.1;
  int n_time_masks = 2;
  IntRange time_mask_size{0, 25};
  int n_freq_masks = 2;
  IntRange freq_mask_size{0, 7};

  // Every range collapsed to the identity transform.
  static AugmentPolicy none();
  void validate() const;
};

// Time shift (zero fill) → linear resampling → background noise, then
// clamp to [-1, 1]. Output length and rate equal the input's.
Waveform augment_waveform(const Waveform& w,
                          std::span<const Waveform> noise_pool,
                          const AugmentPolicy& policy, Rng& rng);

struct Stripe {
  std::size_t start = 0;
  std::size_t width = 0;
};

struct MaskPlan {
  std::vector<Stripe> time;  // rows
  std::vector<Stripe> freq;  // columns
};

MaskPlan draw_masks(std::size_t frames, std::size_t features,
                    const AugmentPolicy& policy, Rng& rng);
// Zeroes every masked cell, leaving the rest untouched.
Spectrogram apply_masks(Spectrogram s, const MaskPlan& plan);
Spectrogram spec_augment(const Spectrogram& s, const AugmentPolicy& policy,
                         Rng& rng);

}  // namespace kwt
