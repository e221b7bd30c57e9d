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

#include "kwt/teacher.h"

#include <fstream>

#include <nlohmann/json.hpp>

#include "kwt/error.h"

namespace kwt {

OracleTeacher::OracleTeacher(const Dataset& reference) {
  for (const auto& e : reference.examples) labels_[e.id] = e.label;
}

std::vector<int> OracleTeacher::labels(std::span<const std::string> ids,
                                       std::span<const Tensor<float>>) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = labels_.find(id);
    if (it == labels_.end()) throw InputError("oracle teacher: unknown id " + id);
    out.push_back(it->second);
  }
  return out;
}

FileTeacher::FileTeacher(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open teacher logits " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      const auto logits = rec.at("logits").get<std::vector<double>>();
      if (logits.empty()) throw InputError("empty logits");
      int best = 0;
      for (std::size_t c = 1; c < logits.size(); ++c)
        if (logits[c] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
      labels_[rec.at("id").get<std::string>()] = best;
    } catch (const std::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::vector<int> FileTeacher::labels(std::span<const std::string> ids,
                                     std::span<const Tensor<float>>) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = labels_.find(id);
    if (it == labels_.end()) throw InputError("teacher logits missing id " + id);
    out.push_back(it->second);
  }
  return out;
}

}  // namespace kwt
