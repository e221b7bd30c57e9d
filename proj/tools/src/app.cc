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

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>

#include "kwt/analysis.h"
#include "kwt/audio.h"
#include "kwt/checkpoint.h"
#include "kwt/error.h"
#include "kwt/serialization.h"
#include "kwt/teacher.h"
#include "kwt/train.h"

namespace kwt::app {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json to_json(const BenchmarkReport& r) {
  return json{{"model", r.model},         {"params", r.params},
              {"warmup_runs", r.warmup_runs}, {"timed_runs", r.timed_runs},
              {"threads", r.threads},     {"latencies_ms", r.latencies_ms},
              {"mean_ms", r.mean_ms},     {"std_ms", r.std_ms},
              {"p50_ms", r.p50_ms},       {"p99_ms", r.p99_ms}};
}

void summarize(BenchmarkReport& r) {
  const auto& x = r.latencies_ms;
  if (x.empty()) throw InputError("benchmark: no timed samples");
  double sum = 0.0;
  for (double v : x) sum += v;
  r.mean_ms = sum / static_cast<double>(x.size());
  double sq = 0.0;
  for (double v : x) sq += (v - r.mean_ms) * (v - r.mean_ms);
  r.std_ms = std::sqrt(sq / static_cast<double>(x.size()));
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  auto rank = [&](double p) {
    const auto k = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
    return sorted[std::clamp<std::size_t>(k, 1, sorted.size()) - 1];
  };
  r.p50_ms = rank(50.0);
  r.p99_ms = rank(99.0);
}

BenchmarkReport run_benchmark(const KWTModel<float>& model, const Spectrogram& input,
                              std::string model_id) {
  if (static_cast<int>(input.frames()) != model.config.input_time ||
      static_cast<int>(input.features()) != model.config.input_freq) {
    throw ConfigError("benchmark: model expects " + std::to_string(model.config.input_time) +
                      "x" + std::to_string(model.config.input_freq) + " input");
  }
  BenchmarkReport report;
  report.model = std::move(model_id);
  report.params = model.params.scalar_count();
  volatile float sink = 0.0f;
  for (int i = 0; i < report.warmup_runs; ++i) sink = sink + forward(model, input.values).logits[0];
  report.latencies_ms.reserve(static_cast<std::size_t>(report.timed_runs));
  for (int i = 0; i < report.timed_runs; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const auto result = forward(model, input.values);
    const auto stop = std::chrono::steady_clock::now();
    sink = sink + result.logits[0];
    report.latencies_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  summarize(report);
  return report;
}

const std::vector<std::pair<int, int>>& default_ablation_grid() {
  static const std::vector<std::pair<int, int>> grid = {
      {1, 40}, {2, 40}, {7, 40}, {2, 20}, {7, 20}, {98, 1}};
  return grid;
}

namespace {

std::unique_ptr<Teacher> make_teacher(const RunConfig& cfg, const Dataset& clean) {
  if (cfg.teacher.empty()) return nullptr;
  if (cfg.teacher == "oracle") return std::make_unique<OracleTeacher>(clean);
  return std::make_unique<FileTeacher>(cfg.teacher.substr(5));
}

std::vector<const LabeledExample*> held_out(const Dataset& data) {
  auto out = data.split(Split::kValidation);
  const auto test = data.split(Split::kTest);
  out.insert(out.end(), test.begin(), test.end());
  return out;
}

std::optional<double> accuracy_on(const KWTModel<float>& model,
                                  const std::vector<const LabeledExample*>& examples,
                                  const MfccExtractor& fe, int threads) {
  if (examples.empty()) return std::nullopt;
  return evaluate(model, examples, fe, threads).accuracy;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct TrainOutcome {
  KWTModel<float> model;
  TrainSummary summary;
};

TrainOutcome train_model(const RunConfig& cfg, const Dataset& data, const Dataset& clean,
                         std::ostream* metrics, bool verbose) {
  TrainOutcome out{KWTModel<float>::init(cfg.model, cfg.seed), {}};
  const auto teacher = make_teacher(cfg, clean);
  AugmentPolicy policy = cfg.augment;
  TrainConfig train = cfg.train;
  if (!train.augment) policy = AugmentPolicy::none();
  Trainer trainer(out.model, data, train, policy, teacher.get(), cfg.frontend);
  out.summary = trainer.run([&](const EvalRecord& r) {
    const json line{{"step", r.step},
                    {"loss", r.loss},
                    {"lr", r.lr},
                    {"train_acc", r.train_acc},
                    {"val_acc", optional_json(r.val_acc)}};
    if (metrics) *metrics << line.dump() << '\n' << std::flush;
    if (verbose) std::cerr << line.dump() << '\n';
  });
  return out;
}

}  // namespace

AblationResult run_ablation(const RunConfig& base, const std::vector<std::pair<int, int>>& shapes) {
  AblationResult result;
  const Dataset clean = build_clean_dataset(base);
  const Dataset data = base.label_noise > 0 ? with_label_noise(clean, base.label_noise, base.seed)
                                            : clean;
  const MfccExtractor fe(base.frontend);
  for (const auto& [t, f] : shapes) {
    RunConfig cfg = base;
    cfg.model.patch_time = t;
    cfg.model.patch_freq = f;
    try {
      cfg.resolve();
    } catch (const ConfigError& e) {
      result.skipped.push_back(format_patch(t, f) + ": " + e.what());
      std::cerr << "skipping patch " << format_patch(t, f) << ": " << e.what() << '\n';
      continue;
    }
    const TrainOutcome trained = train_model(cfg, data, clean, nullptr, false);
    const auto val = accuracy_on(trained.model, data.split(Split::kValidation), fe, cfg.threads);
    AblationRow row{t, f, val.value_or(0.0), count_parameters(cfg.model)};
    std::cerr << "patch " << format_patch(t, f) << " val_accuracy " << row.val_accuracy << '\n';
    result.rows.push_back(row);
  }
  return result;
}

void write_ablation_csv(const fs::path& path, const AblationResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "patch_shape,val_accuracy,params\n";
  char buf[64];
  for (const auto& r : result.rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.val_accuracy);
    out << format_patch(r.patch_time, r.patch_freq) << ',' << buf << ',' << r.params << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  std::string dataset_root;
  std::string task;
  std::string model;
  std::string norm;
  std::string patch;
  std::string teacher;
  std::string out;
  int threads = 1;
  std::int64_t steps = 0;

  std::string checkpoint;
  std::string wav;
  std::string split = "test";
  std::string run_id = "kwt";
  int example = 0;
  bool features = false;
  std::vector<std::string> patches;
};

RunConfig resolve_config(const CLI::App& app, const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (app.count("--seed")) cfg.seed = o.seed;
  if (app.count("--dataset-root")) cfg.dataset_root = o.dataset_root;
  if (app.count("--task")) cfg.task = o.task;
  if (app.count("--model")) {
    cfg.model = KWTConfig::preset(o.model);
    cfg.model_name = o.model;
  }
  if (app.count("--norm")) cfg.model.norm_mode = parse_norm_mode(o.norm);
  if (app.count("--patch")) {
    const auto [t, f] = parse_patch(o.patch);
    cfg.model.patch_time = t;
    cfg.model.patch_freq = f;
  }
  if (app.count("--distill-teacher")) cfg.teacher = o.teacher;
  if (app.count("--out")) cfg.out_dir = o.out;
  if (app.count("--threads")) cfg.threads = o.threads;
  if (app.count("--steps")) cfg.train.steps = o.steps;
  if (const char* det = std::getenv("KWT_DETERMINISTIC"); det && std::strcmp(det, "1") == 0) {
    cfg.threads = 1;
  }
  return cfg;
}

fs::path checkpoint_path(const Options& o, const RunConfig& cfg) {
  return o.checkpoint.empty() ? cfg.out_dir / "model.kwt" : fs::path(o.checkpoint);
}

void check_input_shape(const KWTConfig& model, const RunConfig& cfg) {
  if (model.input_time != cfg.model.input_time || model.input_freq != cfg.model.input_freq) {
    throw ConfigError("checkpoint expects " + std::to_string(model.input_time) + "x" +
                      std::to_string(model.input_freq) + " inputs but the front end yields " +
                      std::to_string(cfg.model.input_time) + "x" +
                      std::to_string(cfg.model.input_freq));
  }
}

// The waveform named by --wav, else the chosen held-out example.
Waveform pick_waveform(const Options& o, const RunConfig& cfg) {
  if (!o.wav.empty()) return read_wav(o.wav);
  const Dataset data = build_clean_dataset(cfg);
  auto pool = held_out(data);
  if (pool.empty()) {
    for (const auto& e : data.examples) pool.push_back(&e);
  }
  if (o.example < 0 || static_cast<std::size_t>(o.example) >= pool.size()) {
    throw InputError("--example " + std::to_string(o.example) + " out of range [0, " +
                     std::to_string(pool.size()) + ")");
  }
  return example_waveform(*pool[static_cast<std::size_t>(o.example)]);
}

void write_features(const fs::path& path, const Dataset& data, const MfccExtractor& fe) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write("KWTFEAT1", 8);
  const std::uint64_t n = data.examples.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  bool header = false;
  for (const auto& e : data.examples) {
    const Spectrogram s = fe.compute(example_waveform(e));
    if (!header) {
      const std::uint32_t dims[2] = {static_cast<std::uint32_t>(s.frames()),
                                     static_cast<std::uint32_t>(s.features())};
      out.write(reinterpret_cast<const char*>(dims), sizeof dims);
      header = true;
    }
    out.write(reinterpret_cast<const char*>(s.values.data().data()),
              static_cast<std::streamsize>(s.values.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

int cmd_preprocess(const RunConfig& cfg, const Options& o) {
  const Dataset data = build_dataset(cfg, o.features);
  write_json(cfg.out_dir / "config.json", cfg);
  write_manifest(cfg.out_dir / "manifest.csv", data);
  json per_split = json::object(), per_label = json::object();
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    per_split[std::string(to_string(s))] = data.split(s).size();
  }
  for (const auto& name : data.class_names) per_label[name] = 0;
  for (const auto& e : data.examples) {
    per_label[data.class_names[static_cast<std::size_t>(e.label)]] =
        per_label[data.class_names[static_cast<std::size_t>(e.label)]].get<int>() + 1;
  }
  write_json(cfg.out_dir / "summary.json", json{{"examples", data.examples.size()},
                                                {"splits", per_split},
                                                {"labels", per_label},
                                                {"skipped_files", data.skipped_files}});
  if (o.features) write_features(cfg.out_dir / "features.bin", data, MfccExtractor(cfg.frontend));
  std::cout << data.examples.size() << " examples indexed into " << cfg.out_dir.string() << '\n';
  return kExitOk;
}

int cmd_train(RunConfig cfg) {
  cfg.model.distill_token = !cfg.teacher.empty();
  cfg.resolve();
  const Dataset clean = build_clean_dataset(cfg);
  const Dataset data = cfg.label_noise > 0 ? with_label_noise(clean, cfg.label_noise, cfg.seed)
                                           : clean;
  fs::create_directories(cfg.out_dir);
  write_json(cfg.out_dir / "config.json", cfg);
  std::ofstream metrics(cfg.out_dir / "metrics.jsonl");
  if (!metrics) throw IoError("cannot write " + (cfg.out_dir / "metrics.jsonl").string());
  const TrainOutcome trained = train_model(cfg, data, clean, &metrics, true);

  const MfccExtractor fe(cfg.frontend);
  const auto val = accuracy_on(trained.model, data.split(Split::kValidation), fe, cfg.threads);
  const auto test = accuracy_on(trained.model, data.split(Split::kTest), fe, cfg.threads);
  const auto both = accuracy_on(trained.model, held_out(data), fe, cfg.threads);
  const double train_acc = trained.summary.evals.empty() ? 0.0 : trained.summary.evals.back().train_acc;
  save_checkpoint(cfg.out_dir / "model.kwt", trained.model,
                  json{{"task", cfg.task}, {"seed", cfg.seed},
                       {"steps_run", trained.summary.steps_run}});
  const json summary{{"steps_run", trained.summary.steps_run},
                     {"warmup_steps", trained.summary.warmup_steps},
                     {"train_acc", train_acc},
                     {"val_acc", optional_json(val)},
                     {"test_acc", optional_json(test)},
                     {"held_out_acc", optional_json(both)},
                     {"params", trained.model.params.scalar_count()}};
  write_json(cfg.out_dir / "summary.json", summary);
  std::cout << summary.dump() << '\n';
  return kExitOk;
}

int cmd_eval(RunConfig cfg, const Options& o) {
  cfg.resolve();
  const auto model = load_checkpoint<float>(checkpoint_path(o, cfg));
  check_input_shape(model.config, cfg);
  if (model.config.num_classes != cfg.model.num_classes) {
    throw ConfigError("checkpoint has " + std::to_string(model.config.num_classes) +
                      " classes but task " + cfg.task + " has " +
                      std::to_string(cfg.model.num_classes));
  }
  const Dataset data = build_dataset(cfg);
  std::vector<const LabeledExample*> examples;
  if (o.split == "train") examples = data.split(Split::kTrain);
  else if (o.split == "validation") examples = data.split(Split::kValidation);
  else if (o.split == "test") examples = data.split(Split::kTest);
  else if (o.split == "held-out") examples = held_out(data);
  else throw ConfigError("--split must be train, validation, test or held-out");
  const EvalResult r = evaluate(model, examples, MfccExtractor(cfg.frontend), cfg.threads);
  write_json(cfg.out_dir / "config.json", cfg);
  const json out{{"split", o.split}, {"accuracy", r.accuracy}, {"correct", r.correct},
                 {"count", r.count}, {"checkpoint", checkpoint_path(o, cfg).string()}};
  write_json(cfg.out_dir / "eval.json", out);
  std::cout << out.dump() << '\n';
  return kExitOk;
}

int cmd_benchmark(RunConfig cfg, const Options& o) {
  cfg.threads = 1;
  cfg.resolve();
  KWTModel<float> model;
  std::string id = cfg.model_name;
  if (!o.checkpoint.empty()) {
    model = load_checkpoint<float>(o.checkpoint);
    check_input_shape(model.config, cfg);
    id = fs::path(o.checkpoint).stem().string();
  } else {
    model = KWTModel<float>::init(cfg.model, cfg.seed);
  }
  Waveform w;
  if (!o.wav.empty()) {
    w = read_wav(o.wav);
  } else {
    w = make_synthetic_dataset(std::max(cfg.synthetic.classes, 2), 1, cfg.seed).examples.front().waveform;
  }
  const Spectrogram input = MfccExtractor(cfg.frontend).compute(w);
  const BenchmarkReport report = run_benchmark(model, input, id);
  write_json(cfg.out_dir / "config.json", cfg);
  write_json(cfg.out_dir / "benchmark.json", to_json(report));
  std::printf("%s: mean %.3f ms, std %.3f ms, p50 %.3f ms, p99 %.3f ms over %d runs\n",
              report.model.c_str(), report.mean_ms, report.std_ms, report.p50_ms, report.p99_ms,
              report.timed_runs);
  return kExitOk;
}

int cmd_ablate(RunConfig cfg, const Options& o) {
  cfg.teacher.clear();
  cfg.model.distill_token = false;
  std::vector<std::pair<int, int>> shapes;
  for (const auto& p : o.patches) shapes.push_back(parse_patch(p));
  if (shapes.empty()) shapes = default_ablation_grid();
  cfg.resolve();
  fs::create_directories(cfg.out_dir);
  json j = cfg;
  json grid = json::array();
  for (const auto& [t, f] : shapes) grid.push_back(format_patch(t, f));
  j["ablation_shapes"] = grid;
  write_json(cfg.out_dir / "config.json", j);
  const AblationResult result = run_ablation(cfg, shapes);
  write_ablation_csv(cfg.out_dir / "ablation.csv", result);
  if (!result.skipped.empty()) {
    std::ofstream skipped(cfg.out_dir / "ablation_skipped.txt");
    for (const auto& s : result.skipped) skipped << s << '\n';
  }
  std::cout << result.rows.size() << " shapes trained, " << result.skipped.size() << " skipped\n";
  return kExitOk;
}

int cmd_visualize_attention(RunConfig cfg, const Options& o) {
  cfg.resolve();
  const auto model = load_checkpoint<float>(checkpoint_path(o, cfg));
  check_input_shape(model.config, cfg);
  const Waveform w = pick_waveform(o, cfg);
  const MfccExtractor fe(cfg.frontend);
  const Spectrogram spec = fe.compute(w);
  const auto result = forward(model, spec, true);
  RolloutOptions ro;
  ro.special_tokens = model.config.special_tokens();
  const RolloutResult rollout = attention_rollout(result.attention, ro);
  const auto windows = time_windows(rollout, model.config, cfg.frontend.stride_ms);
  write_json(cfg.out_dir / "config.json", cfg);
  write_rollout_csv(rollout_path(cfg.out_dir, o.run_id), windows);
  write_rollout_svg(cfg.out_dir / (o.run_id + "_rollout.svg"), windows, fit_length(w, cfg.frontend.clip_samples));
  std::cout << "predicted class " << predict(result) << ", rollout written to "
            << rollout_path(cfg.out_dir, o.run_id).string() << '\n';
  return kExitOk;
}

int cmd_visualize_positions(RunConfig cfg, const Options& o) {
  cfg.resolve();
  const auto model = load_checkpoint<float>(checkpoint_path(o, cfg));
  const Tensor<double> sim = position_similarity(patch_position_embeddings(model));
  write_json(cfg.out_dir / "config.json", cfg);
  write_similarity_csv(similarity_path(cfg.out_dir, o.run_id), sim);
  write_similarity_svg(cfg.out_dir / (o.run_id + "_possim.svg"), sim);
  std::cout << "similarity written to " << similarity_path(cfg.out_dir, o.run_id).string() << '\n';
  return kExitOk;
}

int cmd_count_params(RunConfig cfg, bool write_config) {
  cfg.resolve();
  const std::int64_t n = count_parameters(cfg.model);
  if (write_config) write_json(cfg.out_dir / "config.json", cfg);
  std::cout << json{{"model", cfg.model_name}, {"num_classes", cfg.model.num_classes},
                    {"patch", format_patch(cfg.model.patch_time, cfg.model.patch_freq)},
                    {"distill_token", cfg.model.distill_token}, {"params", n}}
                   .dump()
            << '\n';
  return kExitOk;
}

int dispatch(CLI::App& app, const Options& o) {
  const RunConfig cfg = resolve_config(app, o);
  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "preprocess") {
    RunConfig c = cfg;
    c.resolve();
    return cmd_preprocess(c, o);
  }
  if (name == "train") return cmd_train(cfg);
  if (name == "distill") {
    RunConfig c = cfg;
    if (c.teacher.empty()) c.teacher = "oracle";
    return cmd_train(c);
  }
  if (name == "eval") return cmd_eval(cfg, o);
  if (name == "benchmark") return cmd_benchmark(cfg, o);
  if (name == "ablate") return cmd_ablate(cfg, o);
  if (name == "visualize-attention") return cmd_visualize_attention(cfg, o);
  if (name == "visualize-positions") return cmd_visualize_positions(cfg, o);
  return cmd_count_params(cfg, app.count("--out") > 0);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Keyword Transformer training, evaluation and analysis", "kwt"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "Run configuration (JSON); flags override it");
  app.add_option("--seed", o.seed, "Seed for data, initialization and augmentation");
  app.add_option("--dataset-root", o.dataset_root, "Speech Commands directory");
  app.add_option("--task", o.task, "Task")
      ->check(CLI::IsMember({"v1-12", "v2-12", "v2-35", "synthetic"}));
  app.add_option("--model", o.model, "Model preset")
      ->check(CLI::IsMember({"kwt1", "kwt2", "kwt3", "micro"}));
  app.add_option("--norm", o.norm, "Normalization placement")
      ->check(CLI::IsMember({"postnorm", "prenorm"}));
  app.add_option("--patch", o.patch, "Patch shape TxF");
  app.add_option("--distill-teacher", o.teacher, "oracle or file:PATH");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--threads", o.threads, "Worker threads for training and evaluation")
      ->check(CLI::PositiveNumber);
  app.add_option("--steps", o.steps, "Training steps")->check(CLI::PositiveNumber);

  auto* pre = app.add_subcommand("preprocess", "Index the dataset and write its manifest");
  pre->add_flag("--features", o.features, "Also write MFCC features to features.bin");
  app.add_subcommand("train", "Train a model");
  app.add_subcommand("distill", "Train with a teacher (oracle by default)");
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev->add_option("--checkpoint", o.checkpoint, "Checkpoint (default OUT/model.kwt)");
  ev->add_option("--split", o.split, "train, validation, test or held-out");
  auto* bench = app.add_subcommand("benchmark", "Single-thread inference latency");
  bench->add_option("--checkpoint", o.checkpoint, "Checkpoint (default: fresh --model)");
  bench->add_option("--wav", o.wav, "Input clip");
  auto* ablate = app.add_subcommand("ablate", "Patch-shape sweep");
  ablate->add_option("--patches", o.patches, "Patch shapes TxF (default grid when absent)");
  auto* va = app.add_subcommand("visualize-attention", "Attention rollout over time windows");
  va->add_option("--checkpoint", o.checkpoint, "Checkpoint (default OUT/model.kwt)");
  va->add_option("--wav", o.wav, "Input clip");
  va->add_option("--example", o.example, "Held-out example index when no --wav");
  va->add_option("--run-id", o.run_id, "Output file prefix");
  auto* vp = app.add_subcommand("visualize-positions", "Positional embedding similarity");
  vp->add_option("--checkpoint", o.checkpoint, "Checkpoint (default OUT/model.kwt)");
  vp->add_option("--run-id", o.run_id, "Output file prefix");
  app.add_subcommand("count-params", "Print the learnable parameter count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    return dispatch(app, o);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace kwt::app
