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

#include <nlohmann/json.hpp>

#include "kwt/augment.h"
#include "kwt/frontend.h"
#include "kwt/model.h"
#include "kwt/optim.h"
#include "kwt/train.h"

// JSON mappings for the configuration types. Unknown keys are rejected
// with ConfigError; missing keys keep their defaults.
namespace kwt {

void to_json(nlohmann::json& j, const KWTConfig& c);
void from_json(const nlohmann::json& j, KWTConfig& c);

void to_json(nlohmann::json& j, const AugmentPolicy& p);
void from_json(const nlohmann::json& j, AugmentPolicy& p);

void to_json(nlohmann::json& j, const FrontendConfig& c);
void from_json(const nlohmann::json& j, FrontendConfig& c);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Throws ConfigError naming the first key of `j` not in `allowed`.
void require_known_keys(const nlohmann::json& j,
                        std::initializer_list<const char*> allowed,
                        const char* section);

}  // namespace kwt
