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
#include <span>
#include <vector>

#include "kwt/tensor.h"

namespace kwt {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.1;
};

template <Real T>
struct AdamWState {
  AdamWConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

// Creates zeroed moments shaped like `params`.
template <Real T>
AdamWState<T> make_adamw_state(std::span<Tensor<T>* const> params,
                               AdamWConfig config);

// One AdamW update reading each parameter's gradient slot. Weight decay is
// decoupled: p ← p − lr·wd·p, then the bias-corrected Adam step.
template <Real T>
void adamw_step(std::span<Tensor<T>* const> params, AdamWState<T>& state,
                double lr);

struct ScheduleConfig {
  std::int64_t total_steps = 1;
  std::int64_t warmup_steps = 0;
  double lr_peak = 1e-3;
};

// Linear warmup from 0 to lr_peak over warmup_steps, then a half cosine down
// to 0 at total_steps. Steps beyond total_steps return the final value 0.
double cosine_warmup_lr(std::int64_t step, const ScheduleConfig& cfg);

extern template struct AdamWState<float>;
extern template struct AdamWState<double>;

}  // namespace kwt
