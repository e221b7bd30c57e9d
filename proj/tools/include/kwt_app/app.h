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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kwt_app/run_config.h"

namespace kwt::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitInput = 2,
  kExitConfig = 3,
  kExitIo = 4,
};

inline constexpr int kWarmupRuns = 10;
inline constexpr int kTimedRuns = 100;

struct BenchmarkReport {
  std::string model;
  std::int64_t params = 0;
  int warmup_runs = kWarmupRuns;
  int timed_runs = kTimedRuns;
  int threads = 1;
  std::vector<double> latencies_ms;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
};

nlohmann::json to_json(const BenchmarkReport& report);

// Mean, population standard deviation and nearest-rank percentiles of the
// timed samples.
void summarize(BenchmarkReport& report);

// 10 untimed then 100 timed single-thread forwards of one spectrogram.
BenchmarkReport run_benchmark(const KWTModel<float>& model,
                              const Spectrogram& input, std::string model_id);

struct AblationRow {
  int patch_time = 0;
  int patch_freq = 0;
  double val_accuracy = 0.0;
  std::int64_t params = 0;
};

struct AblationResult {
  std::vector<AblationRow> rows;
  std::vector<std::string> skipped;  // "TxF: reason"
};

const std::vector<std::pair<int, int>>& default_ablation_grid();

// One desk-scale training run per valid shape; invalid shapes are skipped.
AblationResult run_ablation(const RunConfig& base,
                            const std::vector<std::pair<int, int>>& shapes);

void write_ablation_csv(const std::filesystem::path& path,
                        const AblationResult& result);

// Parses arguments and runs one subcommand. Errors are reported on stderr
// and mapped to ExitCode.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace kwt::app
