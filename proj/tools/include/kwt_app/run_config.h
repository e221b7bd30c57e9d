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
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "kwt/augment.h"
#include "kwt/data.h"
#include "kwt/frontend.h"
#include "kwt/model.h"
#include "kwt/train.h"

namespace kwt::app {

struct SyntheticSpec {
  int classes = 4;
  int per_class = 50;
};

// Everything needed to reproduce a run from its config file plus the
// dataset. Written as config.json next to every command's outputs.
struct RunConfig {
  // "synthetic" | "v1-12" | "v2-12" | "v2-35".
  std::string task = "synthetic";
  std::filesystem::path dataset_root;
  SyntheticSpec synthetic;
  // Fraction of training labels replaced by another class.
  double label_noise = 0.0;
  // Preset the model was derived from; informational.
  std::string model_name = "micro";
  KWTConfig model = KWTConfig::micro();
  TrainConfig train = TrainConfig::desk_scale();
  AugmentPolicy augment;
  FrontendConfig frontend;
  // "" | "oracle" | "file:PATH".
  std::string teacher;
  std::uint64_t seed = 0;
  int threads = 1;
  std::filesystem::path out_dir = "runs/default";

  // Copies seed and threads into the training config, sets the class count
  // from the task and the input shape from the front end, then validates.
  // Throws ConfigError.
  void resolve();
  int task_classes() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

// Throws IoError when unreadable, ConfigError on invalid JSON or schema.
RunConfig load_run_config(const std::filesystem::path& path);

// Creates parent directories. Throws IoError.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// Synthetic corpus or Speech Commands tree, with label noise applied.
Dataset build_dataset(const RunConfig& config, bool load_audio = true);
// The same corpus without label noise.
Dataset build_clean_dataset(const RunConfig& config, bool load_audio = true);

// "7x20" → {7, 20}. Throws ConfigError.
std::pair<int, int> parse_patch(const std::string& text);
std::string format_patch(int time, int freq);

}  // namespace kwt::app
