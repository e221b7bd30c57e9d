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

#include "kwt/optim.h"

#include <cmath>
#include <numbers>
#include <string>

namespace kwt {

template <Real T>
AdamWState<T> make_adamw_state(std::span<Tensor<T>* const> params,
                               AdamWConfig config) {
  AdamWState<T> state;
  state.config = config;
  for (const Tensor<T>* p : params) {
    state.first_moment.emplace_back(p->size(), T(0));
    state.second_moment.emplace_back(p->size(), T(0));
  }
  return state;
}

template <Real T>
void adamw_step(std::span<Tensor<T>* const> params, AdamWState<T>& state,
                double lr) {
  if (lr < 0) throw ConfigError("adamw: learning rate must be >= 0");
  if (params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ConfigError("adamw: optimizer state tracks " +
                      std::to_string(state.first_moment.size()) +
                      " tensors but " + std::to_string(params.size()) +
                      " were given");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor<T>& p = *params[i];
    if (!p.has_grad()) {
      throw ConfigError("adamw: parameter " + std::to_string(i) +
                        " has no gradient");
    }
    if (state.first_moment[i].size() != p.size() ||
        state.second_moment[i].size() != p.size()) {
      throw ConfigError("adamw: moment shape mismatch for parameter " +
                        std::to_string(i));
    }
  }

  const AdamWConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const T b1 = static_cast<T>(c.beta1);
  const T b2 = static_cast<T>(c.beta2);
  const T bc1 = static_cast<T>(1.0 - std::pow(c.beta1, t));
  const T bc2 = static_cast<T>(1.0 - std::pow(c.beta2, t));
  const T step_lr = static_cast<T>(lr);
  const T decay = static_cast<T>(1.0 - lr * c.weight_decay);
  const T eps = static_cast<T>(c.eps);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    const std::vector<T>& g = p.grad();
    std::vector<T>& m = state.first_moment[i];
    std::vector<T>& v = state.second_moment[i];
    T* w = p.values().data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const T m_hat = m[j] / bc1;
      const T v_hat = v[j] / bc2;
      w[j] = w[j] * decay - step_lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

double cosine_warmup_lr(std::int64_t step, const ScheduleConfig& cfg) {
  if (cfg.total_steps <= 0) throw ConfigError("schedule: total_steps <= 0");
  if (cfg.warmup_steps < 0 || cfg.warmup_steps >= cfg.total_steps) {
    throw ConfigError("schedule: warmup_steps must lie in [0, total_steps)");
  }
  if (step < 0) step = 0;
  if (step >= cfg.total_steps) return 0.0;
  if (step < cfg.warmup_steps) {
    return cfg.lr_peak * static_cast<double>(step) /
           static_cast<double>(cfg.warmup_steps);
  }
  const double progress =
      static_cast<double>(step - cfg.warmup_steps) /
      static_cast<double>(cfg.total_steps - cfg.warmup_steps);
  return cfg.lr_peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template struct AdamWState<float>;
template struct AdamWState<double>;
template AdamWState<float> make_adamw_state(std::span<Tensor<float>* const>,
                                            AdamWConfig);
template AdamWState<double> make_adamw_state(std::span<Tensor<double>* const>,
                                             AdamWConfig);
template void adamw_step(std::span<Tensor<float>* const>, AdamWState<float>&,
                         double);
template void adamw_step(std::span<Tensor<double>* const>,
                         AdamWState<double>&, double);

}  // namespace kwt
