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

#include "kwt_app/run_config.h"

#include <fstream>
#include <sstream>

#include "kwt/error.h"
#include "kwt/serialization.h"

namespace kwt::app {

using nlohmann::json;

int RunConfig::task_classes() const {
  if (task == "synthetic") {
    if (synthetic.classes < 2) throw ConfigError("synthetic.classes must be >= 2");
    return synthetic.classes;
  }
  return static_cast<int>(TaskSpec::parse(task).class_names.size());
}

void RunConfig::resolve() {
  if (synthetic.per_class <= 0) throw ConfigError("synthetic.per_class must be positive");
  if (!(label_noise >= 0.0 && label_noise < 1.0)) {
    throw ConfigError("label_noise must lie in [0, 1)");
  }
  if (threads <= 0) throw ConfigError("threads must be positive");
  if (!teacher.empty() && teacher != "oracle" && teacher.rfind("file:", 0) != 0) {
    throw ConfigError("teacher must be 'oracle' or 'file:PATH', got '" + teacher + "'");
  }
  model.num_classes = task_classes();
  model.input_time = static_cast<int>(frame_count(
      static_cast<std::int64_t>(frontend.clip_samples), frontend.window_ms,
      frontend.stride_ms, frontend.sample_rate));
  model.input_freq = frontend.num_features;
  train.seed = seed;
  train.threads = threads;
  model.validate();
  train.validate();
  augment.validate();
}

void to_json(json& j, const RunConfig& c) {
  json train = c.train;
  train.erase("seed");
  train.erase("threads");
  j = json{{"task", c.task},
           {"dataset_root", c.dataset_root.string()},
           {"synthetic", {{"classes", c.synthetic.classes}, {"per_class", c.synthetic.per_class}}},
           {"label_noise", c.label_noise},
           {"model_name", c.model_name},
           {"model", c.model},
           {"train", train},
           {"augment", c.augment},
           {"frontend", c.frontend},
           {"teacher", c.teacher},
           {"seed", c.seed},
           {"threads", c.threads},
           {"out_dir", c.out_dir.string()}};
}

namespace {

template <typename V>
void get_opt(const json& j, const char* key, V& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

}  // namespace

void from_json(const json& j, RunConfig& c) {
  require_known_keys(j,
                     {"task", "dataset_root", "synthetic", "label_noise",
                      "model_name", "model", "train", "augment", "frontend",
                      "teacher", "seed", "threads", "out_dir"},
                     "config");
  get_opt(j, "task", c.task);
  if (j.contains("dataset_root")) {
    std::string root;
    get_opt(j, "dataset_root", root);
    c.dataset_root = root;
  }
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    require_known_keys(s, {"classes", "per_class"}, "synthetic");
    get_opt(s, "classes", c.synthetic.classes);
    get_opt(s, "per_class", c.synthetic.per_class);
  }
  get_opt(j, "label_noise", c.label_noise);
  get_opt(j, "model_name", c.model_name);
  if (j.contains("model")) {
    const json& m = j.at("model");
    if (m.is_string()) {
      c.model_name = m.get<std::string>();
      c.model = KWTConfig::preset(c.model_name);
    } else {
      m.get_to(c.model);
    }
  }
  if (j.contains("train")) j.at("train").get_to(c.train);
  if (j.contains("augment")) j.at("augment").get_to(c.augment);
  if (j.contains("frontend")) j.at("frontend").get_to(c.frontend);
  get_opt(j, "teacher", c.teacher);
  get_opt(j, "seed", c.seed);
  get_opt(j, "threads", c.threads);
  if (j.contains("out_dir")) {
    std::string out;
    get_opt(j, "out_dir", out);
    c.out_dir = out;
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return j.get<RunConfig>();
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset build_clean_dataset(const RunConfig& config, bool load_audio) {
  if (config.task == "synthetic") {
    return make_synthetic_dataset(config.synthetic.classes, config.synthetic.per_class,
                                  config.seed);
  }
  if (config.dataset_root.empty()) {
    throw ConfigError("task " + config.task + " requires --dataset-root");
  }
  return load_speech_commands(config.dataset_root, TaskSpec::parse(config.task),
                              LoadOptions{load_audio});
}

Dataset build_dataset(const RunConfig& config, bool load_audio) {
  Dataset data = build_clean_dataset(config, load_audio);
  if (config.label_noise > 0.0) return with_label_noise(data, config.label_noise, config.seed);
  return data;
}

std::pair<int, int> parse_patch(const std::string& text) {
  const auto x = text.find_first_of("xX");
  int t = 0, f = 0;
  std::size_t used_t = 0, used_f = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument("no separator");
    t = std::stoi(text.substr(0, x), &used_t);
    f = std::stoi(text.substr(x + 1), &used_f);
  } catch (const std::logic_error&) {
    throw ConfigError("patch must look like TxF, got '" + text + "'");
  }
  if (used_t != x || used_f != text.size() - x - 1 || t <= 0 || f <= 0) {
    throw ConfigError("patch must look like TxF with positive sizes, got '" + text + "'");
  }
  return {t, f};
}

std::string format_patch(int time, int freq) {
  return std::to_string(time) + "x" + std::to_string(freq);
}

}  // namespace kwt::app
