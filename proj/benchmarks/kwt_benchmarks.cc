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

#include <benchmark/benchmark.h>

#include <string>

#include "kwt/data.h"
#include "kwt/frontend.h"
#include "kwt/model.h"
#include "kwt/train.h"

namespace {

const kwt::Spectrogram& example_input() {
  static const kwt::Spectrogram s =
      kwt::compute_mfcc(kwt::make_synthetic_dataset(2, 1, 1).examples.front().waveform);
  return s;
}

void BM_Forward(benchmark::State& state, const std::string& preset) {
  const auto model = kwt::KWTModel<float>::init(kwt::KWTConfig::preset(preset), 0);
  const auto& input = example_input();
  for (auto _ : state) {
    auto result = kwt::forward(model, input.values);
    benchmark::DoNotOptimize(result.logits);
  }
  state.counters["params"] = static_cast<double>(model.params.scalar_count());
}

void BM_ForwardBackward(benchmark::State& state) {
  auto model = kwt::KWTModel<float>::init(kwt::KWTConfig::micro(), 0);
  const auto& input = example_input();
  auto grads = kwt::KWTParams<float>::zeros(model.config);
  kwt::Tensor<float> dlogits(kwt::Shape{static_cast<std::size_t>(model.config.num_classes)});
  dlogits[0] = 1.0f;
  for (auto _ : state) {
    kwt::ForwardCache<float> cache;
    const auto result = kwt::forward(model, input.values, false, &cache);
    kwt::backward<float>(model, cache, dlogits, nullptr, grads);
    benchmark::DoNotOptimize(result.logits);
  }
}

void BM_Mfcc(benchmark::State& state) {
  const auto w = kwt::make_synthetic_dataset(2, 1, 1).examples.front().waveform;
  const kwt::MfccExtractor extractor;
  for (auto _ : state) {
    auto s = extractor.compute(w);
    benchmark::DoNotOptimize(s.values);
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Forward, micro, std::string("micro"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Forward, kwt1, std::string("kwt1"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Forward, kwt2, std::string("kwt2"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Forward, kwt3, std::string("kwt3"))->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardBackward)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mfcc)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
