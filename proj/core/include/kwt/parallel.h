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

#include <cstddef>
#include <functional>

namespace kwt {

// Splits [0, n) into `workers` contiguous chunks and runs
// fn(begin, end, worker) for each, worker 0 on the calling thread. The
// chunking depends only on n and workers.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, std::size_t, int)>& fn);

}  // namespace kwt
