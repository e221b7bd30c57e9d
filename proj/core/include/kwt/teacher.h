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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kwt/data.h"
#include "kwt/tensor.h"

namespace kwt {

// Produces hard labels for a batch. Implementations receive the exact
// augmented spectrograms the student is trained on.
class Teacher {
 public:
  virtual ~Teacher() = default;
  virtual std::vector<int> labels(std::span<const std::string> ids,
                                  std::span<const Tensor<float>> inputs) = 0;
  virtual std::string name() const = 0;
};

// Returns the ground-truth label recorded for each id, e.g. the clean labels
// of a corpus whose training labels were corrupted.
class OracleTeacher : public Teacher {
 public:
  explicit OracleTeacher(const Dataset& reference);

  std::vector<int> labels(std::span<const std::string> ids,
                          std::span<const Tensor<float>> inputs) override;
  std::string name() const override { return "oracle"; }

 private:
  std::map<std::string, int> labels_;
};

// Replays precomputed teacher logits from a JSON-lines file with one
// {"id": ..., "logits": [...]} record per example; the label is the argmax
// (ties to the lower class id).
class FileTeacher : public Teacher {
 public:
  explicit FileTeacher(const std::filesystem::path& path);

  std::vector<int> labels(std::span<const std::string> ids,
                          std::span<const Tensor<float>> inputs) override;
  std::string name() const override { return "file"; }

  std::size_t size() const { return labels_.size(); }

 private:
  std::map<std::string, int> labels_;
};

}  // namespace kwt
