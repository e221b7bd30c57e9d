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

#include "kwt/serialization.h"

#include <string>

#include "kwt/error.h"

namespace kwt {

using nlohmann::json;

void require_known_keys(const json& j, std::initializer_list<const char*> allowed,
                        const char* section) {
  if (!j.is_object()) {
    throw ConfigError(std::string(section) + ": expected a JSON object");
  }
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) {
      throw ConfigError(std::string(section) + ": unknown key '" + key + "'");
    }
  }
}

namespace {

template <typename V>
void get_opt(const json& j, const char* key, V& out, const char* section) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception& e) {
    throw ConfigError(std::string(section) + "." + key + ": " + e.what());
  }
}

}  // namespace

void to_json(json& j, const KWTConfig& c) {
  j = json{{"dim", c.dim},
           {"mlp_dim", c.mlp_dim},
           {"heads", c.heads},
           {"layers", c.layers},
           {"patch_time", c.patch_time},
           {"patch_freq", c.patch_freq},
           {"num_classes", c.num_classes},
           {"norm_mode", std::string(to_string(c.norm_mode))},
           {"distill_token", c.distill_token},
           {"input_time", c.input_time},
           {"input_freq", c.input_freq},
           {"ln_eps", c.ln_eps}};
}

void from_json(const json& j, KWTConfig& c) {
  constexpr const char* kSection = "model";
  require_known_keys(j,
                     {"dim", "mlp_dim", "heads", "layers", "patch_time",
                      "patch_freq", "num_classes", "norm_mode", "distill_token",
                      "input_time", "input_freq", "ln_eps"},
                     kSection);
  get_opt(j, "dim", c.dim, kSection);
  get_opt(j, "mlp_dim", c.mlp_dim, kSection);
  get_opt(j, "heads", c.heads, kSection);
  get_opt(j, "layers", c.layers, kSection);
  get_opt(j, "patch_time", c.patch_time, kSection);
  get_opt(j, "patch_freq", c.patch_freq, kSection);
  get_opt(j, "num_classes", c.num_classes, kSection);
  if (j.contains("norm_mode")) {
    std::string mode;
    get_opt(j, "norm_mode", mode, kSection);
    c.norm_mode = parse_norm_mode(mode);
  }
  get_opt(j, "distill_token", c.distill_token, kSection);
  get_opt(j, "input_time", c.input_time, kSection);
  get_opt(j, "input_freq", c.input_freq, kSection);
  get_opt(j, "ln_eps", c.ln_eps, kSection);
}

void to_json(json& j, const AugmentPolicy& p) {
  j = json{{"time_shift_ms", {p.time_shift_ms.lo, p.time_shift_ms.hi}},
           {"resample_factor", {p.resample_factor.lo, p.resample_factor.hi}},
           {"background_volume", p.background_volume},
           {"n_time_masks", p.n_time_masks},
           {"time_mask_size", {p.time_mask_size.lo, p.time_mask_size.hi}},
           {"n_freq_masks", p.n_freq_masks},
           {"freq_mask_size", {p.freq_mask_size.lo, p.freq_mask_size.hi}}};
}

namespace {

template <typename R>
void get_range(const json& j, const char* key, R& r) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2) {
    throw ConfigError(std::string("augment.") + key + ": expected [lo, hi]");
  }
  try {
    v.at(0).get_to(r.lo);
    v.at(1).get_to(r.hi);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("augment.") + key + ": " + e.what());
  }
}

}  // namespace

void from_json(const json& j, AugmentPolicy& p) {
  constexpr const char* kSection = "augment";
  require_known_keys(j,
                     {"time_shift_ms", "resample_factor", "background_volume",
                      "n_time_masks", "time_mask_size", "n_freq_masks",
                      "freq_mask_size"},
                     kSection);
  get_range(j, "time_shift_ms", p.time_shift_ms);
  get_range(j, "resample_factor", p.resample_factor);
  get_opt(j, "background_volume", p.background_volume, kSection);
  get_opt(j, "n_time_masks", p.n_time_masks, kSection);
  get_range(j, "time_mask_size", p.time_mask_size);
  get_opt(j, "n_freq_masks", p.n_freq_masks, kSection);
  get_range(j, "freq_mask_size", p.freq_mask_size);
  p.validate();
}

void to_json(json& j, const FrontendConfig& c) {
  j = json{{"sample_rate", c.sample_rate},   {"window_ms", c.window_ms},
           {"stride_ms", c.stride_ms},       {"num_mel_bins", c.num_mel_bins},
           {"num_features", c.num_features}, {"fft_size", c.fft_size},
           {"lower_hz", c.lower_hz},         {"upper_hz", c.upper_hz},
           {"log_floor", c.log_floor},       {"clip_samples", c.clip_samples}};
}

void from_json(const json& j, FrontendConfig& c) {
  constexpr const char* kSection = "frontend";
  require_known_keys(j,
                     {"sample_rate", "window_ms", "stride_ms", "num_mel_bins",
                      "num_features", "fft_size", "lower_hz", "upper_hz",
                      "log_floor", "clip_samples"},
                     kSection);
  get_opt(j, "sample_rate", c.sample_rate, kSection);
  get_opt(j, "window_ms", c.window_ms, kSection);
  get_opt(j, "stride_ms", c.stride_ms, kSection);
  get_opt(j, "num_mel_bins", c.num_mel_bins, kSection);
  get_opt(j, "num_features", c.num_features, kSection);
  get_opt(j, "fft_size", c.fft_size, kSection);
  get_opt(j, "lower_hz", c.lower_hz, kSection);
  get_opt(j, "upper_hz", c.upper_hz, kSection);
  get_opt(j, "log_floor", c.log_floor, kSection);
  get_opt(j, "clip_samples", c.clip_samples, kSection);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"steps", c.steps},
           {"batch_size", c.batch_size},
           {"lr", c.lr},
           {"weight_decay", c.weight_decay},
           {"label_smoothing", c.label_smoothing},
           {"warmup_epochs", c.warmup_epochs},
           {"seed", c.seed},
           {"eval_every", c.eval_every},
           {"threads", c.threads},
           {"augment", c.augment},
           {"target_train_accuracy", c.target_train_accuracy}};
}

void from_json(const json& j, TrainConfig& c) {
  constexpr const char* kSection = "train";
  require_known_keys(j,
                     {"steps", "batch_size", "lr", "weight_decay",
                      "label_smoothing", "warmup_epochs", "seed", "eval_every",
                      "threads", "augment", "target_train_accuracy"},
                     kSection);
  get_opt(j, "steps", c.steps, kSection);
  get_opt(j, "batch_size", c.batch_size, kSection);
  get_opt(j, "lr", c.lr, kSection);
  get_opt(j, "weight_decay", c.weight_decay, kSection);
  get_opt(j, "label_smoothing", c.label_smoothing, kSection);
  get_opt(j, "warmup_epochs", c.warmup_epochs, kSection);
  get_opt(j, "seed", c.seed, kSection);
  get_opt(j, "eval_every", c.eval_every, kSection);
  get_opt(j, "threads", c.threads, kSection);
  get_opt(j, "augment", c.augment, kSection);
  get_opt(j, "target_train_accuracy", c.target_train_accuracy, kSection);
  c.validate();
}

}  // namespace kwt
