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

#include "kwt/parallel.h"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace kwt {

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, std::size_t, int)>& fn) {
  const std::size_t w = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(n, 1));
  if (w == 1) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  auto run = [&](std::size_t k) {
    const std::size_t begin = n * k / w, end = n * (k + 1) / w;
    try {
      fn(begin, end, static_cast<int>(k));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(w - 1);
  for (std::size_t k = 1; k < w; ++k) threads.emplace_back(run, k);
  run(0);
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace kwt
