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

#include "kwt_app/app.h"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "kwt/analysis.h"
#include "kwt/checkpoint.h"
#include "kwt/error.h"
#include "test_support.h"

namespace kwt::app {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Two-class synthetic corpus, a few steps.
fs::path tiny_config(const fs::path& dir, const json& extra = json::object()) {
  json j{{"synthetic", {{"classes", 2}, {"per_class", 10}}},
         {"train", {{"steps", 3}, {"batch_size", 4}, {"eval_every", 2}}}};
  j.merge_patch(extra);
  write_json(dir / "cfg.json", j);
  return dir / "cfg.json";
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "kwt");
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  const int code = run_cli(args);
  ::testing::internal::GetCapturedStdout();
  ::testing::internal::GetCapturedStderr();
  return code;
}

TEST(Cli, CountParamsPrintsJson) {
  ::testing::internal::CaptureStdout();
  ASSERT_EQ(run_cli({"kwt", "count-params", "--model", "kwt1", "--task", "v2-12"}), kExitOk);
  const json out = json::parse(::testing::internal::GetCapturedStdout());
  EXPECT_EQ(out.at("params"), 609612);
  EXPECT_EQ(out.at("num_classes"), 12);
}

TEST(Cli, ExitCodesByErrorKind) {
  testing::TempDir dir("cli_exit");
  EXPECT_EQ(run({"count-params", "--patch", "3x40"}), kExitConfig);
  EXPECT_EQ(run({"count-params", "--patch", "three"}), kExitConfig);
  EXPECT_EQ(run({"count-params", "--model", "kwt9"}), kExitConfig);
  EXPECT_EQ(run({"count-params", "--bogus"}), kExitConfig);
  EXPECT_EQ(run({"train", "--task", "v2-12", "--out", (dir / "a").string()}), kExitConfig);
  EXPECT_EQ(run({"preprocess", "--task", "v2-12", "--dataset-root", (dir / "none").string(),
                 "--out", (dir / "b").string()}),
            kExitInput);
  EXPECT_EQ(run({"train", "--config", (dir / "missing.json").string()}), kExitIo);
  {
    std::ofstream bad(dir / "bad.json");
    bad << "{\"seed\": ";
  }
  EXPECT_EQ(run({"train", "--config", (dir / "bad.json").string()}), kExitConfig);
  write_json(dir / "unknown.json", json{{"sead", 1}});
  EXPECT_EQ(run({"train", "--config", (dir / "unknown.json").string()}), kExitConfig);
  EXPECT_EQ(run({"eval", "--out", (dir / "c").string()}), kExitIo);
  EXPECT_EQ(run({}), kExitConfig);
}

TEST(Cli, TrainWritesArtifactsAndReproducesFromItsConfig) {
  testing::TempDir dir("cli_train");
  const fs::path cfg = tiny_config(dir.path());
  ASSERT_EQ(run({"train", "--config", cfg.string(), "--out", (dir / "a").string()}), kExitOk);
  for (const char* f : {"config.json", "metrics.jsonl", "model.kwt", "summary.json"})
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;

  std::ifstream metrics(dir / "a" / "metrics.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(metrics, line)) {
    const json j = json::parse(line);
    for (const char* k : {"step", "loss", "lr", "train_acc", "val_acc"}) EXPECT_TRUE(j.contains(k));
    ++lines;
  }
  EXPECT_EQ(lines, 2);  // steps 2 and 3

  // The written config alone reproduces the run.
  ASSERT_EQ(run({"train", "--config", (dir / "a" / "config.json").string(), "--out",
                 (dir / "b").string()}),
            kExitOk);
  EXPECT_EQ(slurp(dir / "a" / "metrics.jsonl"), slurp(dir / "b" / "metrics.jsonl"));
  EXPECT_EQ(slurp(dir / "a" / "model.kwt"), slurp(dir / "b" / "model.kwt"));

  const RunConfig written = load_run_config(dir / "b" / "config.json");
  EXPECT_EQ(written.synthetic.classes, 2);
  EXPECT_EQ(written.train.steps, 3);
  EXPECT_EQ(written.model.num_classes, 2);
}

TEST(Cli, FlagsOverrideConfigFile) {
  testing::TempDir dir("cli_override");
  const fs::path cfg = tiny_config(dir.path(), json{{"seed", 5}});
  ASSERT_EQ(run({"train", "--config", cfg.string(), "--seed", "9", "--norm", "prenorm",
                 "--patch", "2x20", "--out", (dir / "o").string()}),
            kExitOk);
  const RunConfig r = load_run_config(dir / "o" / "config.json");
  EXPECT_EQ(r.seed, 9u);
  EXPECT_EQ(r.model.norm_mode, NormMode::kPreNorm);
  EXPECT_EQ(r.model.patch_time, 2);
  EXPECT_EQ(r.model.patch_freq, 20);
  const auto model = load_checkpoint<float>(dir / "o" / "model.kwt");
  EXPECT_EQ(model.config.patch_time, 2);
}

TEST(Cli, DistillDefaultsToOracleTeacher) {
  testing::TempDir dir("cli_distill");
  const fs::path cfg = tiny_config(dir.path(), json{{"label_noise", 0.3}});
  ASSERT_EQ(run({"distill", "--config", cfg.string(), "--out", (dir / "d").string()}), kExitOk);
  const RunConfig r = load_run_config(dir / "d" / "config.json");
  EXPECT_EQ(r.teacher, "oracle");
  EXPECT_TRUE(r.model.distill_token);
  EXPECT_TRUE(load_checkpoint<float>(dir / "d" / "model.kwt").config.distill_token);
  EXPECT_EQ(run({"distill", "--config", cfg.string(), "--distill-teacher", "nobody", "--out",
                 (dir / "e").string()}),
            kExitConfig);
}

TEST(Cli, EvalAndVisualizationsUseTheCheckpoint) {
  testing::TempDir dir("cli_eval");
  const fs::path cfg = tiny_config(dir.path());
  const std::string out = (dir / "r").string();
  ASSERT_EQ(run({"train", "--config", cfg.string(), "--out", out}), kExitOk);
  ASSERT_EQ(run({"eval", "--config", cfg.string(), "--out", out, "--split", "held-out"}), kExitOk);
  const json ev = json::parse(slurp(dir / "r" / "eval.json"));
  EXPECT_GT(ev.at("count").get<int>(), 0);
  EXPECT_EQ(run({"eval", "--config", cfg.string(), "--out", out, "--split", "dev"}), kExitConfig);

  // A checkpoint with another class count does not fit the task.
  EXPECT_EQ(run({"eval", "--config", cfg.string(), "--out", out, "--task", "v2-12",
                 "--dataset-root", (dir / "nothing").string()}),
            kExitConfig);

  ASSERT_EQ(run({"visualize-attention", "--config", cfg.string(), "--out", out, "--run-id", "t"}),
            kExitOk);
  const auto windows = read_rollout_csv(rollout_path(dir / "r", "t"));
  EXPECT_EQ(windows.size(), 98u);
  double total = 0.0;
  for (const auto& w : windows) total += w.weight;
  EXPECT_NEAR(total, 1.0, 1e-6);
  EXPECT_TRUE(fs::exists(dir / "r" / "t_rollout.svg"));
  EXPECT_EQ(run({"visualize-attention", "--config", cfg.string(), "--out", out, "--example",
                 "100000"}),
            kExitInput);

  ASSERT_EQ(run({"visualize-positions", "--config", cfg.string(), "--out", out, "--run-id", "t"}),
            kExitOk);
  const Tensor<double> sim = read_similarity_csv(similarity_path(dir / "r", "t"));
  ASSERT_EQ(sim.dim(0), 98u);
  for (std::size_t i = 0; i < 98; ++i) EXPECT_EQ(sim.at(i, i), 1.0);
}

TEST(Cli, PreprocessWritesManifestAndFeatures) {
  testing::TempDir dir("cli_pre");
  const fs::path cfg = tiny_config(dir.path());
  ASSERT_EQ(run({"preprocess", "--config", cfg.string(), "--features", "--out",
                 (dir / "p").string()}),
            kExitOk);
  const json summary = json::parse(slurp(dir / "p" / "summary.json"));
  EXPECT_EQ(summary.at("examples"), 20);
  const std::string feats = slurp(dir / "p" / "features.bin");
  EXPECT_EQ(feats.substr(0, 8), "KWTFEAT1");
  EXPECT_EQ(feats.size(), 8 + 8 + 8 + 20 * 98 * 40 * sizeof(float));
  EXPECT_TRUE(fs::exists(dir / "p" / "manifest.csv"));
  EXPECT_TRUE(fs::exists(dir / "p" / "config.json"));
}

TEST(Benchmark, SummaryStatistics) {
  BenchmarkReport r;
  for (int i = 1; i <= 100; ++i) r.latencies_ms.push_back(i);
  summarize(r);
  EXPECT_DOUBLE_EQ(r.mean_ms, 50.5);
  EXPECT_NEAR(r.std_ms, std::sqrt((100.0 * 100.0 - 1.0) / 12.0), 1e-9);
  EXPECT_EQ(r.p50_ms, 50.0);
  EXPECT_EQ(r.p99_ms, 99.0);
  BenchmarkReport empty;
  EXPECT_THROW(summarize(empty), InputError);
}

TEST(Benchmark, ProtocolAndReport) {
  testing::TempDir dir("cli_bench");
  ASSERT_EQ(run({"benchmark", "--model", "micro", "--out", (dir / "b").string()}), kExitOk);
  const json r = json::parse(slurp(dir / "b" / "benchmark.json"));
  EXPECT_EQ(r.at("warmup_runs"), 10);
  EXPECT_EQ(r.at("timed_runs"), 100);
  EXPECT_EQ(r.at("threads"), 1);
  const auto samples = r.at("latencies_ms").get<std::vector<double>>();
  ASSERT_EQ(samples.size(), 100u);
  EXPECT_GE(r.at("mean_ms").get<double>(), *std::min_element(samples.begin(), samples.end()));
  EXPECT_TRUE(fs::exists(dir / "b" / "config.json"));
}

TEST(Ablation, OneRowPerValidShape) {
  testing::TempDir dir("cli_ablate");
  const fs::path cfg = tiny_config(dir.path());
  ASSERT_EQ(run({"ablate", "--config", cfg.string(), "--patches", "1x40", "3x40", "98x40",
                 "--out", (dir / "a").string()}),
            kExitOk);
  std::ifstream in(dir / "a" / "ablation.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "patch_shape,val_accuracy,params");
  std::vector<std::string> shapes;
  while (std::getline(in, line)) shapes.push_back(line.substr(0, line.find(',')));
  EXPECT_EQ(shapes, (std::vector<std::string>{"1x40", "98x40"}));
  EXPECT_NE(slurp(dir / "a" / "ablation_skipped.txt").find("3x40"), std::string::npos);
}

TEST(Ablation, DefaultGridCoversTimeAndFrequencyExtremes) {
  const auto& grid = default_ablation_grid();
  EXPECT_NE(std::find(grid.begin(), grid.end(), std::make_pair(1, 40)), grid.end());
  EXPECT_NE(std::find(grid.begin(), grid.end(), std::make_pair(98, 1)), grid.end());
}

TEST(RunConfig, PatchParsing) {
  EXPECT_EQ(parse_patch("7x20"), (std::pair<int, int>{7, 20}));
  EXPECT_EQ(parse_patch("98X1"), (std::pair<int, int>{98, 1}));
  for (const char* bad : {"", "7", "x20", "7x", "0x40", "7x-1", "7x20x1", "7.5x20"})
    EXPECT_THROW(parse_patch(bad), ConfigError) << bad;
  EXPECT_EQ(format_patch(2, 40), "2x40");
}

TEST(RunConfig, JsonRoundTripAndPresetShorthand) {
  RunConfig c;
  c.task = "v2-35";
  c.dataset_root = "/data/sc";
  c.label_noise = 0.25;
  c.teacher = "file:/tmp/t.jsonl";
  c.seed = 17;
  c.threads = 3;
  c.model.norm_mode = NormMode::kPreNorm;
  const RunConfig r = json(c).get<RunConfig>();
  EXPECT_EQ(json(r), json(c));
  const json preset{{"model", "kwt2"}};
  EXPECT_EQ(preset.get<RunConfig>().model, KWTConfig::kwt2());

  RunConfig unresolved;
  unresolved.task = "v2-35";
  unresolved.resolve();
  EXPECT_EQ(unresolved.model.num_classes, 35);
  EXPECT_EQ(unresolved.model.input_time, 98);
  RunConfig noisy;
  noisy.label_noise = 1.0;
  EXPECT_THROW(noisy.resolve(), ConfigError);
}

}  // namespace
}  // namespace kwt::app
