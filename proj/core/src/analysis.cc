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

#include "kwt/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kwt/error.h"

namespace kwt {

namespace {

Tensor<double> multiply(const Tensor<double>& a, const Tensor<double>& b) {
  const std::size_t n = a.rows();
  Tensor<double> out({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double v = a.at(i, k);
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += v * b.at(k, j);
    }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw InputError(path.string() + ": not a number: '" + s + "'");
  }
  return v;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

template <Real T>
RolloutResult attention_rollout(std::span<const AttentionRecord<T>> records,
                                const RolloutOptions& options) {
  if (records.empty()) throw InputError("attention_rollout: no attention records");
  const AttentionRecord<T>& first = records.front();
  if (first.weights.rank() != 3) {
    throw InputError("attention_rollout: records must be [heads, N, N]");
  }
  const std::size_t n = first.weights.dim(1);
  const auto specials = static_cast<std::size_t>(options.special_tokens);
  if (options.special_tokens < 1 || specials >= n) {
    throw InputError("attention_rollout: special token count does not fit " +
                     std::to_string(n) + " tokens");
  }

  RolloutResult result;
  Tensor<double> rollout;
  for (const AttentionRecord<T>& rec : records) {
    const Tensor<T>& w = rec.weights;
    if (w.rank() != 3 || w.dim(1) != n || w.dim(2) != n || w.dim(0) == 0) {
      throw InputError("attention_rollout: layer " + std::to_string(rec.layer) +
                       " has shape " + shape_string(w.shape()) + ", expected [heads, " +
                       std::to_string(n) + ", " + std::to_string(n) + "]");
    }
    const std::size_t heads = w.dim(0);
    Tensor<double> a({n, n});
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t i = 0; i < n * n; ++i)
        a[i] += static_cast<double>(w[h * n * n + i]);
    for (double& v : a.values()) v /= static_cast<double>(heads);
    if (options.residual_mix) {
      for (double& v : a.values()) v *= 0.5;
      for (std::size_t i = 0; i < n; ++i) a.at(i, i) += 0.5;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (double v : a.row(i)) s += v;
      if (!(s > 0.0)) {
        throw InputError("attention_rollout: zero attention row in layer " +
                         std::to_string(rec.layer));
      }
      for (double& v : a.row(i)) v /= s;
    }
    rollout = rollout.empty() ? std::move(a) : multiply(a, rollout);
    if (options.keep_intermediates) result.cumulative.push_back(rollout);
  }

  const std::size_t patches = n - specials;
  result.weights = Tensor<double>({patches});
  double total = 0.0;
  for (std::size_t j = 0; j < patches; ++j) {
    result.weights[j] = rollout.at(0, specials + j);
    total += result.weights[j];
  }
  if (!(total > 0.0)) throw InputError("attention_rollout: no mass on patch tokens");
  for (double& v : result.weights.values()) v /= total;
  return result;
}

template <Real T>
Tensor<double> position_similarity(const Tensor<T>& positions) {
  if (positions.rank() != 2) throw InputError("position_similarity: expected [M, d]");
  const std::size_t m = positions.rows(), d = positions.cols();
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (T v : positions.row(i)) s += static_cast<double>(v) * static_cast<double>(v);
    norms[i] = std::sqrt(s);
    if (!(norms[i] > 0.0)) {
      throw InputError("position_similarity: row " + std::to_string(i) + " has zero norm");
    }
  }
  Tensor<double> s({m, m});
  for (std::size_t i = 0; i < m; ++i) {
    s.at(i, i) = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        dot += static_cast<double>(positions.at(i, k)) * static_cast<double>(positions.at(j, k));
      const double c = std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
      s.at(i, j) = c;
      s.at(j, i) = c;
    }
  }
  return s;
}

template <Real T>
Tensor<T> patch_position_embeddings(const KWTModel<T>& model) {
  const auto specials = static_cast<std::size_t>(model.config.special_tokens());
  const std::size_t patches = static_cast<std::size_t>(model.config.num_patches());
  const Tensor<T>& pos = model.params.pos_embed;
  const std::size_t d = pos.cols();
  std::vector<T> rows(pos.values().begin() + static_cast<std::ptrdiff_t>(specials * d),
                      pos.values().end());
  return Tensor<T>({patches, d}, std::move(rows));
}

std::vector<WindowWeight> time_windows(const RolloutResult& rollout,
                                       const KWTConfig& config, double stride_ms) {
  const int time_blocks = config.input_time / config.patch_time;
  const int freq_blocks = config.input_freq / config.patch_freq;
  if (rollout.weights.size() != static_cast<std::size_t>(time_blocks * freq_blocks)) {
    throw InputError("time_windows: rollout has " + std::to_string(rollout.weights.size()) +
                     " patches, configuration implies " +
                     std::to_string(time_blocks * freq_blocks));
  }
  std::vector<WindowWeight> out(static_cast<std::size_t>(time_blocks));
  for (int t = 0; t < time_blocks; ++t) {
    WindowWeight& w = out[static_cast<std::size_t>(t)];
    w.index = t;
    w.start_ms = static_cast<double>(t * config.patch_time) * stride_ms;
    for (int f = 0; f < freq_blocks; ++f)
      w.weight += rollout.weights[static_cast<std::size_t>(t * freq_blocks + f)];
  }
  return out;
}

std::filesystem::path rollout_path(const std::filesystem::path& dir, const std::string& run_id) {
  return dir / (run_id + "_rollout.csv");
}

std::filesystem::path similarity_path(const std::filesystem::path& dir,
                                      const std::string& run_id) {
  return dir / (run_id + "_possim.csv");
}

void write_rollout_csv(const std::filesystem::path& path, std::span<const WindowWeight> windows) {
  std::ofstream out = open_out(path);
  out << "time_window_index,start_ms,weight\n";
  for (const WindowWeight& w : windows)
    out << w.index << ',' << fmt(w.start_ms) << ',' << fmt(w.weight) << '\n';
  finish(out, path);
}

std::vector<WindowWeight> read_rollout_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "time_window_index,start_ms,weight") {
    throw InputError(path.string() + ": missing rollout header");
  }
  std::vector<WindowWeight> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw InputError(path.string() + ": expected 3 columns");
    WindowWeight w;
    w.index = static_cast<int>(parse_double(cells[0], path));
    w.start_ms = parse_double(cells[1], path);
    w.weight = parse_double(cells[2], path);
    out.push_back(w);
  }
  return out;
}

void write_similarity_csv(const std::filesystem::path& path, const Tensor<double>& similarity) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < similarity.rows(); ++i) {
    for (std::size_t j = 0; j < similarity.cols(); ++j) {
      if (j) out << ',';
      out << fmt(similarity.at(i, j));
    }
    out << '\n';
  }
  finish(out, path);
}

Tensor<double> read_similarity_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (rows == 0) cols = cells.size();
    if (cells.size() != cols) throw InputError(path.string() + ": ragged similarity matrix");
    for (const auto& c : cells) values.push_back(parse_double(c, path));
    ++rows;
  }
  if (rows == 0 || rows != cols) throw InputError(path.string() + ": matrix is not square");
  return Tensor<double>({rows, cols}, std::move(values));
}

void write_rollout_svg(const std::filesystem::path& path, std::span<const WindowWeight> windows,
                       const Waveform& waveform) {
  constexpr double kWidth = 800.0, kHeight = 240.0, kMid = kHeight / 2.0;
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  double max_w = 0.0;
  for (const auto& w : windows) max_w = std::max(max_w, w.weight);
  if (!windows.empty() && max_w > 0.0) {
    const double bar = kWidth / static_cast<double>(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
      const double h = windows[i].weight / max_w * kHeight;
      out << "<rect x=\"" << fmt(static_cast<double>(i) * bar) << "\" y=\"" << fmt(kHeight - h)
          << "\" width=\"" << fmt(bar) << "\" height=\"" << fmt(h)
          << "\" fill=\"#e4572e\" fill-opacity=\"0.45\"/>\n";
    }
  }
  const std::size_t n = waveform.samples.size();
  if (n > 0) {
    constexpr std::size_t kColumns = 800;
    double peak = 0.0;
    for (float s : waveform.samples) peak = std::max(peak, static_cast<double>(std::fabs(s)));
    if (peak <= 0.0) peak = 1.0;
    out << "<polyline fill=\"none\" stroke=\"#1d3557\" stroke-width=\"1\" points=\"";
    for (std::size_t c = 0; c < kColumns; ++c) {
      const std::size_t b = c * n / kColumns, e = std::max(b + 1, (c + 1) * n / kColumns);
      double amp = 0.0;
      for (std::size_t i = b; i < std::min(e, n); ++i)
        amp = std::max(amp, static_cast<double>(std::fabs(waveform.samples[i])));
      const double x = static_cast<double>(c) * kWidth / kColumns;
      out << fmt(x) << ',' << fmt(kMid - amp / peak * kMid * 0.9) << ' ';
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  finish(out, path);
}

void write_similarity_svg(const std::filesystem::path& path, const Tensor<double>& similarity) {
  constexpr double kCell = 6.0;
  const std::size_t m = similarity.rows();
  const double size = kCell * static_cast<double>(m);
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(size) << "\" height=\""
      << fmt(size) << "\">\n";
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const int g = static_cast<int>(std::lround((similarity.at(i, j) + 1.0) * 127.5));
      out << "<rect x=\"" << fmt(static_cast<double>(j) * kCell) << "\" y=\""
          << fmt(static_cast<double>(i) * kCell) << "\" width=\"" << kCell << "\" height=\""
          << kCell << "\" fill=\"rgb(" << g << ',' << g << ',' << g << ")\"/>\n";
    }
  out << "</svg>\n";
  finish(out, path);
}

template RolloutResult attention_rollout(std::span<const AttentionRecord<float>>,
                                         const RolloutOptions&);
template RolloutResult attention_rollout(std::span<const AttentionRecord<double>>,
                                         const RolloutOptions&);
template Tensor<double> position_similarity(const Tensor<float>&);
template Tensor<double> position_similarity(const Tensor<double>&);
template Tensor<float> patch_position_embeddings(const KWTModel<float>&);
template Tensor<double> patch_position_embeddings(const KWTModel<double>&);

}  // namespace kwt
