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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kwt/audio.h"

namespace kwt {

enum class Split { kTrain, kValidation, kTest };

std::string_view to_string(Split split);

// Speech Commands convention: the speaker key is the file's basename with
// everything from "_nohash_" on removed; SHA-1 of the key, reduced modulo
// 2^27, is scaled to a percentage. Below val_pct → validation, below
// val_pct + test_pct → test, otherwise train. All clips of a speaker share
// a split.
Split assign_split(std::string_view id, double val_pct = 10.0,
                   double test_pct = 10.0);
std::string speaker_key(std::string_view id);

struct LabeledExample {
  std::string id;
  Waveform waveform;  // empty when loaded without audio
  int label = 0;
  Split split = Split::kTrain;
  std::optional<std::filesystem::path> source;
};

enum class DatasetVersion { kV1, kV2 };

struct TaskSpec {
  DatasetVersion version = DatasetVersion::kV2;
  int num_labels = 12;
  // Class id i is class_names[i]. For 12 labels: "silence", "unknown",
  // then the ten target words alphabetically.
  std::vector<std::string> class_names;
  bool has_silence = true;
  bool has_unknown = true;

  static TaskSpec v1_12();
  static TaskSpec v2_12();
  static TaskSpec v2_35();
  // "v1-12" | "v2-12" | "v2-35".
  static TaskSpec parse(std::string_view name);
};

// The ten command words of the 12-label task.
const std::vector<std::string>& target_words();
// All 35 words of Speech Commands V2, alphabetically.
const std::vector<std::string>& v2_words();

struct Dataset {
  std::vector<std::string> class_names;
  std::vector<LabeledExample> examples;  // sorted by id
  std::vector<Waveform> background_noise;
  std::size_t skipped_files = 0;

  int num_classes() const { return static_cast<int>(class_names.size()); }
  std::vector<const LabeledExample*> split(Split s) const;
};

struct LoadOptions {
  // When false only ids, labels and splits are produced; audio is read on
  // demand through example_waveform().
  bool load_audio = true;
};

// Reads a Speech Commands directory tree (one folder per word plus
// _background_noise_). Throws InputError when the root is missing or holds
// no usable audio; unreadable clips are skipped and counted.
Dataset load_speech_commands(const std::filesystem::path& root,
                             const TaskSpec& task, LoadOptions options = {});

// Audio of an example, reading its source file when not resident.
Waveform example_waveform(const LabeledExample& example);

// n_classes tone families with per-example jitter: frequency ±2%,
// amplitude ±10%, white noise 30 dB below the tone.
Dataset make_synthetic_dataset(int n_classes, int per_class,
                               std::uint64_t seed);

// Copy with `fraction` of the training labels replaced by a different
// class, chosen deterministically from `seed`.
Dataset with_label_noise(const Dataset& data, double fraction,
                         std::uint64_t seed);

// CSV with header "id,label,split"; label is the class name.
void write_manifest(const std::filesystem::path& path, const Dataset& data);

}  // namespace kwt
