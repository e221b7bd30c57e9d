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

#include "kwt/data.h"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>

#include "kwt/error.h"
#include "kwt/random.h"

namespace kwt {

namespace fs = std::filesystem;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "train";
}

std::string speaker_key(std::string_view id) {
  const std::size_t slash = id.find_last_of("/\\");
  std::string_view base = slash == std::string_view::npos ? id : id.substr(slash + 1);
  const std::size_t nohash = base.find("_nohash_");
  if (nohash != std::string_view::npos) base = base.substr(0, nohash);
  return std::string(base);
}

namespace {

std::array<unsigned char, 20> sha1(std::string_view text) {
  std::array<unsigned char, 20> digest{};
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest.data(), &len, EVP_sha1(),
                 nullptr) != 1 ||
      len != digest.size()) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  return digest;
}

}  // namespace

Split assign_split(std::string_view id, double val_pct, double test_pct) {
  constexpr std::uint64_t kMaxWavsPerClass = (1ULL << 27) - 1;
  const auto digest = sha1(speaker_key(id));
  // The digest as a big-endian integer modulo 2^27 is its low 27 bits.
  std::uint64_t low = 0;
  for (std::size_t i = 16; i < 20; ++i) low = (low << 8) | digest[i];
  low &= kMaxWavsPerClass;
  const double percentage =
      static_cast<double>(low) * (100.0 / static_cast<double>(kMaxWavsPerClass));
  if (percentage < val_pct) return Split::kValidation;
  if (percentage < val_pct + test_pct) return Split::kTest;
  return Split::kTrain;
}

const std::vector<std::string>& target_words() {
  static const std::vector<std::string> words = {
      "down", "go", "left", "no", "off", "on", "right", "stop", "up", "yes"};
  return words;
}

const std::vector<std::string>& v2_words() {
  static const std::vector<std::string> words = {
      "backward", "bed",   "bird",  "cat",   "dog",    "down",    "eight",
      "five",     "follow", "forward", "four", "go",    "happy",   "house",
      "learn",    "left",  "marvin", "nine",  "no",     "off",     "on",
      "one",      "right", "seven", "sheila", "six",   "stop",    "three",
      "tree",     "two",   "up",    "visual", "wow",   "yes",     "zero"};
  return words;
}

namespace {

TaskSpec twelve_label(DatasetVersion v) {
  TaskSpec t;
  t.version = v;
  t.num_labels = 12;
  t.class_names = {"silence", "unknown"};
  for (const auto& w : target_words()) t.class_names.push_back(w);
  return t;
}

}  // namespace

TaskSpec TaskSpec::v1_12() { return twelve_label(DatasetVersion::kV1); }
TaskSpec TaskSpec::v2_12() { return twelve_label(DatasetVersion::kV2); }

TaskSpec TaskSpec::v2_35() {
  TaskSpec t;
  t.version = DatasetVersion::kV2;
  t.num_labels = 35;
  t.class_names = v2_words();
  t.has_silence = false;
  t.has_unknown = false;
  return t;
}

TaskSpec TaskSpec::parse(std::string_view name) {
  if (name == "v1-12") return v1_12();
  if (name == "v2-12") return v2_12();
  if (name == "v2-35") return v2_35();
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

std::vector<const LabeledExample*> Dataset::split(Split s) const {
  std::vector<const LabeledExample*> out;
  for (const auto& e : examples)
    if (e.split == s) out.push_back(&e);
  return out;
}

Waveform example_waveform(const LabeledExample& example) {
  if (!example.waveform.samples.empty()) return example.waveform;
  if (example.source) return fit_length(read_wav(*example.source));
  return fit_length(Waveform{});
}

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool dirs) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (dirs ? entry.is_directory() : entry.is_regular_file()) {
      if (!dirs && entry.path().extension() != ".wav") continue;
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t id_hash(const std::string& id) { return fnv1a(id); }

}  // namespace

Dataset load_speech_commands(const fs::path& root, const TaskSpec& task,
                             LoadOptions options) {
  if (!fs::is_directory(root)) {
    throw InputError("dataset root " + root.string() + " is not a directory");
  }
  Dataset data;
  data.class_names = task.class_names;
  std::map<std::string, int> class_of;
  for (std::size_t i = 0; i < task.class_names.size(); ++i)
    class_of[task.class_names[i]] = static_cast<int>(i);
  const int unknown_id = task.has_unknown ? class_of.at("unknown") : -1;
  const int silence_id = task.has_silence ? class_of.at("silence") : -1;

  std::vector<LabeledExample> unknown;
  for (const fs::path& dir : sorted_entries(root, true)) {
    const std::string word = dir.filename().string();
    if (word == "_background_noise_") {
      for (const fs::path& f : sorted_entries(dir, false)) {
        try {
          data.background_noise.push_back(read_wav(f));
        } catch (const std::exception&) {
          ++data.skipped_files;
        }
      }
      continue;
    }
    if (word.empty() || word[0] == '_' || word[0] == '.') continue;
    int label = -1;
    bool is_unknown = false;
    const bool is_target = class_of.contains(word) && word != "silence" && word != "unknown";
    if (is_target) {
      label = class_of.at(word);
    } else if (task.has_unknown) {
      label = unknown_id;
      is_unknown = true;
    } else {
      continue;
    }
    for (const fs::path& f : sorted_entries(dir, false)) {
      LabeledExample e;
      e.id = word + "/" + f.filename().string();
      e.label = label;
      e.split = assign_split(e.id);
      e.source = f;
      if (options.load_audio) {
        try {
          e.waveform = fit_length(read_wav(f));
        } catch (const std::exception&) {
          ++data.skipped_files;
          continue;
        }
      }
      (is_unknown ? unknown : data.examples).push_back(std::move(e));
    }
  }
  if (data.skipped_files > 0) {
    std::cerr << "warning: skipped " << data.skipped_files
              << " unreadable WAV files under " << root.string() << "\n";
  }
  if (data.examples.empty() && unknown.empty()) {
    throw InputError("no usable audio found under " + root.string());
  }

  if (task.has_unknown || task.has_silence) {
    // Per split, unknown and silence each get the mean target-class count.
    const int targets = static_cast<int>(target_words().size());
    std::map<Split, std::size_t> quota;
    for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
      std::size_t n = 0;
      for (const auto& e : data.examples) n += e.split == s;
      quota[s] = static_cast<std::size_t>(
          std::llround(static_cast<double>(n) / targets));
    }
    if (task.has_unknown) {
      std::sort(unknown.begin(), unknown.end(), [](const auto& a, const auto& b) {
        const auto ha = id_hash(a.id), hb = id_hash(b.id);
        return ha != hb ? ha < hb : a.id < b.id;
      });
      std::map<Split, std::size_t> taken;
      for (auto& e : unknown) {
        if (taken[e.split] < quota[e.split]) {
          ++taken[e.split];
          data.examples.push_back(std::move(e));
        }
      }
    }
    if (task.has_silence) {
      std::map<Split, std::size_t> made;
      const std::size_t want = quota[Split::kTrain] + quota[Split::kValidation] +
                               quota[Split::kTest];
      for (std::size_t k = 0, total = 0; total < want && k < 100 * (want + 1); ++k) {
        char name[48];
        std::snprintf(name, sizeof(name), "_silence_/silence_%06zu", k);
        LabeledExample e;
        e.id = name;
        e.split = assign_split(e.id);
        if (made[e.split] >= quota[e.split]) continue;
        e.label = silence_id;
        const std::uint64_t h = id_hash(e.id);
        if (data.background_noise.empty()) {
          e.waveform = fit_length(Waveform{});
        } else {
          const Waveform& noise =
              data.background_noise[h % data.background_noise.size()];
          const std::size_t span =
              noise.size() > kClipSamples ? noise.size() - kClipSamples + 1 : 1;
          const std::size_t offset = (h >> 16) % span;
          Waveform w;
          const auto end = std::min(noise.size(), offset + kClipSamples);
          w.samples.assign(noise.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                           noise.samples.begin() + static_cast<std::ptrdiff_t>(end));
          e.waveform = fit_length(std::move(w));
        }
        ++made[e.split];
        ++total;
        data.examples.push_back(std::move(e));
      }
    }
  }
  std::sort(data.examples.begin(), data.examples.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return data;
}

namespace {

Waveform synth_example(int cls, int n_classes, Rng& rng) {
  constexpr double kLowHz = 300.0, kHighHz = 4800.0;
  const double ratio =
      n_classes > 1 ? std::pow(kHighHz / kLowHz, 1.0 / (n_classes - 1)) : 1.0;
  const double base = kLowHz * std::pow(ratio, cls);
  const int pattern = cls % 3;

  const double freq = base * (1.0 + rng.uniform(-0.02, 0.02));
  const double amp = 0.5 * (1.0 + rng.uniform(-0.1, 0.1));
  const double onset = rng.uniform(0.15, 0.45);
  const double duration = rng.uniform(0.35, 0.45);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double noise_std = amp * std::pow(10.0, -30.0 / 20.0);
  constexpr double kRamp = 0.03;

  Waveform w;
  w.samples.resize(kClipSamples);
  double theta = phase;
  for (std::size_t i = 0; i < kClipSamples; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    double env = 0.0;
    const double local = t - onset;
    if (local >= 0.0 && local <= duration) {
      const double edge = std::min(local, duration - local);
      env = edge >= kRamp ? 1.0
                          : std::pow(std::sin(0.5 * std::numbers::pi * edge / kRamp), 2);
    }
    double f = freq;
    if (pattern == 2 && local > 0.0) f = freq * (1.0 + 0.25 * std::min(local / duration, 1.0));
    theta += 2.0 * std::numbers::pi * f / kSampleRate;
    double tone = std::sin(theta);
    if (pattern == 1) tone = 0.7 * tone + 0.3 * std::sin(2.0 * theta);
    const double v = amp * env * tone + noise_std * rng.normal();
    w.samples[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return w;
}

}  // namespace

Dataset make_synthetic_dataset(int n_classes, int per_class, std::uint64_t seed) {
  if (n_classes < 2) throw ConfigError("synthetic dataset needs >= 2 classes");
  if (per_class < 1) throw ConfigError("synthetic dataset needs >= 1 example per class");
  Dataset data;
  for (int c = 0; c < n_classes; ++c) {
    char name[16];
    std::snprintf(name, sizeof(name), "class%02d", c);
    data.class_names.emplace_back(name);
  }
  for (int c = 0; c < n_classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      char idx[16];
      std::snprintf(idx, sizeof(idx), "%04d", i);
      LabeledExample e;
      // Split hashing sees only the example index, so every class splits
      // identically.
      e.id = data.class_names[static_cast<std::size_t>(c)] + "/" + idx;
      e.label = c;
      e.split = assign_split(e.id);
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c),
                          static_cast<std::uint64_t>(i)));
      e.waveform = synth_example(c, n_classes, rng);
      data.examples.push_back(std::move(e));
    }
  }
  std::sort(data.examples.begin(), data.examples.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return data;
}

Dataset with_label_noise(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ConfigError("label noise fraction must lie in [0, 1]");
  }
  Dataset out = data;
  std::vector<LabeledExample*> train;
  for (auto& e : out.examples)
    if (e.split == Split::kTrain) train.push_back(&e);
  std::sort(train.begin(), train.end(), [&](const auto* a, const auto* b) {
    const auto ha = fnv1a(a->id, mix_seed(seed)), hb = fnv1a(b->id, mix_seed(seed));
    return ha != hb ? ha < hb : a->id < b->id;
  });
  const auto flips = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(train.size())));
  const int classes = out.num_classes();
  for (std::size_t i = 0; i < flips; ++i) {
    train[i]->label = (train[i]->label + 1) % classes;
  }
  return out;
}

void write_manifest(const fs::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << "id,label,split\n";
  for (const auto& e : data.examples) {
    out << e.id << ',' << data.class_names.at(static_cast<std::size_t>(e.label))
        << ',' << to_string(e.split) << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace kwt
