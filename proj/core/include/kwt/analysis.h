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
#include <span>
#include <string>
#include <vector>

#include "kwt/audio.h"
#include "kwt/model.h"
#include "kwt/tensor.h"

namespace kwt {

struct RolloutOptions {
  // A' = ½A + ½I before row normalization. Off multiplies the raw
  // head-averaged matrices.
  bool residual_mix = true;
  // Leading non-patch tokens (class, then distillation). Row 0 is read out.
  int special_tokens = 1;
  bool keep_intermediates = false;
};

struct RolloutResult {
  Tensor<double> weights;  // [patches], non-negative, sums to 1
  // Cumulative products after each layer when requested.
  std::vector<Tensor<double>> cumulative;
};

// Throws InputError on an empty list, non-square or mismatched records.
template <Real T>
RolloutResult attention_rollout(std::span<const AttentionRecord<T>> records,
                                const RolloutOptions& options = {});

template <Real T>
RolloutResult attention_rollout(const std::vector<AttentionRecord<T>>& records,
                                const RolloutOptions& options = {}) {
  return attention_rollout(std::span<const AttentionRecord<T>>(records), options);
}

// Cosine similarity between rows. The diagonal is exactly 1. Throws
// InputError on a zero-norm row.
template <Real T>
Tensor<double> position_similarity(const Tensor<T>& positions);

// Positional embeddings of the patch tokens only, [patches, d].
template <Real T>
Tensor<T> patch_position_embeddings(const KWTModel<T>& model);

struct WindowWeight {
  int index = 0;
  double start_ms = 0.0;
  double weight = 0.0;
};

// Sums patch weights over frequency blocks, one entry per time window of
// patch_time frames.
std::vector<WindowWeight> time_windows(const RolloutResult& rollout,
                                       const KWTConfig& config, double stride_ms);

std::filesystem::path rollout_path(const std::filesystem::path& dir,
                                   const std::string& run_id);
std::filesystem::path similarity_path(const std::filesystem::path& dir,
                                      const std::string& run_id);

// Writers throw IoError when the file cannot be written; readers throw
// IoError on a missing file and InputError on malformed content.
void write_rollout_csv(const std::filesystem::path& path,
                       std::span<const WindowWeight> windows);
std::vector<WindowWeight> read_rollout_csv(const std::filesystem::path& path);
void write_similarity_csv(const std::filesystem::path& path,
                          const Tensor<double>& similarity);
Tensor<double> read_similarity_csv(const std::filesystem::path& path);

// Bars of rollout weight over the waveform amplitude envelope.
void write_rollout_svg(const std::filesystem::path& path,
                       std::span<const WindowWeight> windows,
                       const Waveform& waveform);
// Grayscale heatmap, white = 1, black = -1.
void write_similarity_svg(const std::filesystem::path& path,
                          const Tensor<double>& similarity);

}  // namespace kwt
