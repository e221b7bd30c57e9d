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
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "kwt/model.h"

namespace kwt {

// Container layout:
//   8 bytes   magic "KWTCKPT1"
//   8 bytes   little-endian header length H
//   H bytes   JSON header {format_version, config, metadata,
//             tensors: [{name, dtype, shape, offset, nbytes}]}
//   payload   row-major little-endian tensor data at the given offsets
inline constexpr std::string_view kCheckpointMagic = "KWTCKPT1";
inline constexpr int kCheckpointVersion = 1;

template <Real T>
std::string encode_checkpoint(const KWTModel<T>& model,
                              const nlohmann::json& metadata = {});

// Converts stored tensors to T when the stored dtype differs.
template <Real T>
KWTModel<T> decode_checkpoint(std::string_view bytes,
                              nlohmann::json* metadata = nullptr);

template <Real T>
void save_checkpoint(const std::filesystem::path& path,
                     const KWTModel<T>& model,
                     const nlohmann::json& metadata = {});

template <Real T>
KWTModel<T> load_checkpoint(const std::filesystem::path& path,
                            nlohmann::json* metadata = nullptr);

}  // namespace kwt
