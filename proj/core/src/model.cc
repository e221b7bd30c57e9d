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

#include "kwt/model.h"

#include <cmath>
#include <string>

#include "kwt/error.h"
#include "kwt/random.h"

namespace kwt {

std::string_view to_string(NormMode mode) {
  return mode == NormMode::kPostNorm ? "postnorm" : "prenorm";
}

NormMode parse_norm_mode(std::string_view name) {
  if (name == "postnorm") return NormMode::kPostNorm;
  if (name == "prenorm") return NormMode::kPreNorm;
  throw ConfigError("unknown norm mode '" + std::string(name) +
                    "' (expected postnorm or prenorm)");
}

void KWTConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("model: " + msg); };
  if (dim <= 0 || mlp_dim <= 0 || heads <= 0 || layers <= 0) {
    fail("dim, mlp_dim, heads and layers must be positive");
  }
  if (dim % heads != 0) {
    fail("dim " + std::to_string(dim) + " is not divisible by " +
         std::to_string(heads) + " heads");
  }
  if (num_classes < 2) fail("num_classes must be >= 2");
  if (input_time <= 0 || input_freq <= 0) fail("input shape must be positive");
  if (patch_time <= 0 || patch_freq <= 0) fail("patch shape must be positive");
  if (patch_time > input_time || patch_freq > input_freq) {
    fail("patch " + std::to_string(patch_time) + "x" +
         std::to_string(patch_freq) + " is larger than the " +
         std::to_string(input_time) + "x" + std::to_string(input_freq) +
         " spectrogram");
  }
  if (input_time % patch_time != 0 || input_freq % patch_freq != 0) {
    fail("patch " + std::to_string(patch_time) + "x" +
         std::to_string(patch_freq) + " does not tile the " +
         std::to_string(input_time) + "x" + std::to_string(input_freq) +
         " spectrogram");
  }
  if (!(ln_eps > 0)) fail("ln_eps must be positive");
}

KWTConfig KWTConfig::kwt1() { return KWTConfig{}; }

KWTConfig KWTConfig::kwt2() {
  KWTConfig c;
  c.dim = 128;
  c.mlp_dim = 512;
  c.heads = 2;
  return c;
}

KWTConfig KWTConfig::kwt3() {
  KWTConfig c;
  c.dim = 192;
  c.mlp_dim = 768;
  c.heads = 3;
  return c;
}

KWTConfig KWTConfig::micro() {
  KWTConfig c;
  c.dim = 32;
  c.mlp_dim = 128;
  c.heads = 2;
  c.layers = 2;
  return c;
}

KWTConfig KWTConfig::preset(std::string_view name) {
  if (name == "kwt1") return kwt1();
  if (name == "kwt2") return kwt2();
  if (name == "kwt3") return kwt3();
  if (name == "micro") return micro();
  throw ConfigError("unknown model preset '" + std::string(name) + "'");
}

std::int64_t count_parameters(const KWTConfig& cfg) {
  cfg.validate();
  const std::int64_t d = cfg.dim, m = cfg.mlp_dim, c = cfg.num_classes;
  const std::int64_t embed = cfg.patch_dim() * d + d;
  const std::int64_t tokens = d * cfg.special_tokens();
  const std::int64_t pos = static_cast<std::int64_t>(cfg.num_tokens()) * d;
  const std::int64_t per_layer = (d * 3 * d + 3 * d)  // qkv
                                 + (d * d + d)         // proj
                                 + 4 * d               // two layer norms
                                 + (d * m + m)         // fc1
                                 + (m * d + d);        // fc2
  const std::int64_t head = (d * c + c) * (cfg.distill_token ? 2 : 1);
  return embed + tokens + pos + cfg.layers * per_layer + head;
}

// ---------------------------------------------------------------------------
// Parameter set

namespace {

template <Real T>
LinearParams<T> zero_linear(std::size_t in, std::size_t out) {
  return {Tensor<T>(Shape{in, out}), Tensor<T>(Shape{out})};
}

template <Real T>
NormParams<T> unit_norm(std::size_t d) {
  return {Tensor<T>(Shape{d}, T(1)), Tensor<T>(Shape{d})};
}

template <typename P, typename F>
void visit_params(P& p, F&& fn) {
  auto lin = [&](const std::string& name, auto& l) {
    fn(name + ".weight", l.weight);
    fn(name + ".bias", l.bias);
  };
  auto norm = [&](const std::string& name, auto& n) {
    fn(name + ".gamma", n.gamma);
    fn(name + ".beta", n.beta);
  };
  lin("embed", p.embed);
  fn("class_token", p.class_token);
  if (!p.distill_token.empty()) fn("distill_token", p.distill_token);
  fn("pos_embed", p.pos_embed);
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const std::string prefix = "layers." + std::to_string(i) + ".";
    auto& layer = p.layers[i];
    lin(prefix + "qkv", layer.qkv);
    lin(prefix + "proj", layer.proj);
    norm(prefix + "norm1", layer.norm1);
    lin(prefix + "fc1", layer.fc1);
    lin(prefix + "fc2", layer.fc2);
    norm(prefix + "norm2", layer.norm2);
  }
  lin("head", p.head);
  if (!p.distill_head.weight.empty()) lin("distill_head", p.distill_head);
}

}  // namespace

template <Real T>
KWTParams<T> KWTParams<T>::zeros(const KWTConfig& cfg) {
  cfg.validate();
  const auto d = static_cast<std::size_t>(cfg.dim);
  const auto m = static_cast<std::size_t>(cfg.mlp_dim);
  const auto c = static_cast<std::size_t>(cfg.num_classes);
  KWTParams p;
  p.embed = zero_linear<T>(static_cast<std::size_t>(cfg.patch_dim()), d);
  p.class_token = Tensor<T>(Shape{1, d});
  if (cfg.distill_token) p.distill_token = Tensor<T>(Shape{1, d});
  p.pos_embed = Tensor<T>(Shape{static_cast<std::size_t>(cfg.num_tokens()), d});
  for (int i = 0; i < cfg.layers; ++i) {
    EncoderLayerParams<T> layer;
    layer.qkv = zero_linear<T>(d, 3 * d);
    layer.proj = zero_linear<T>(d, d);
    layer.norm1 = unit_norm<T>(d);
    layer.fc1 = zero_linear<T>(d, m);
    layer.fc2 = zero_linear<T>(m, d);
    layer.norm2 = unit_norm<T>(d);
    p.layers.push_back(std::move(layer));
  }
  p.head = zero_linear<T>(d, c);
  if (cfg.distill_token) p.distill_head = zero_linear<T>(d, c);
  return p;
}

template <Real T>
void KWTParams<T>::visit(
    const std::function<void(const std::string&, Tensor<T>&)>& fn) {
  visit_params(*this, fn);
}

template <Real T>
void KWTParams<T>::visit(
    const std::function<void(const std::string&, const Tensor<T>&)>& fn)
    const {
  visit_params(*this, fn);
}

template <Real T>
std::vector<Tensor<T>*> KWTParams<T>::tensors() {
  std::vector<Tensor<T>*> out;
  visit([&](const std::string&, Tensor<T>& t) { out.push_back(&t); });
  return out;
}

template <Real T>
std::int64_t KWTParams<T>::scalar_count() const {
  std::int64_t n = 0;
  visit([&](const std::string&, const Tensor<T>& t) {
    n += static_cast<std::int64_t>(t.size());
  });
  return n;
}

template <Real T>
void KWTParams<T>::set_zero() {
  visit([](const std::string&, Tensor<T>& t) { t.fill(T(0)); });
}

template <Real T>
void KWTParams<T>::accumulate(const KWTParams& other) {
  std::vector<const Tensor<T>*> src;
  other.visit([&](const std::string&, const Tensor<T>& t) { src.push_back(&t); });
  std::size_t i = 0;
  visit([&](const std::string&, Tensor<T>& t) { add_inplace(t, *src.at(i++)); });
}

template <Real T>
void KWTParams<T>::scale(T factor) {
  visit([&](const std::string&, Tensor<T>& t) {
    for (T& v : t.values()) v *= factor;
  });
}

template <Real T>
KWTModel<T> KWTModel<T>::init(const KWTConfig& cfg, std::uint64_t seed) {
  KWTModel model{cfg, KWTParams<T>::zeros(cfg)};
  Rng rng(seed);
  model.params.visit([&](const std::string& name, Tensor<T>& t) {
    const bool is_weight = name.ends_with(".weight") || name == "class_token" ||
                           name == "distill_token" || name == "pos_embed";
    if (!is_weight) return;
    for (T& v : t.values()) v = static_cast<T>(rng.truncated_normal(0.02));
  });
  return model;
}

template <Real T>
template <Real U>
KWTModel<U> KWTModel<T>::cast() const {
  KWTModel<U> out{config, KWTParams<U>::zeros(config)};
  std::vector<const Tensor<T>*> src;
  params.visit([&](const std::string&, const Tensor<T>& t) { src.push_back(&t); });
  std::size_t i = 0;
  out.params.visit([&](const std::string&, Tensor<U>& t) {
    const Tensor<T>& s = *src.at(i++);
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = static_cast<U>(s[j]);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Patches and embedding

template <Real T>
Tensor<T> extract_patches(const Tensor<T>& spec, int patch_time,
                          int patch_freq) {
  if (spec.rank() != 2) throw InputError("extract_patches: expected [T, F]");
  const auto time = static_cast<int>(spec.dim(0));
  const auto freq = static_cast<int>(spec.dim(1));
  if (patch_time <= 0 || patch_freq <= 0 || patch_time > time ||
      patch_freq > freq) {
    throw ConfigError("patch " + std::to_string(patch_time) + "x" +
                      std::to_string(patch_freq) + " does not fit a " +
                      std::to_string(time) + "x" + std::to_string(freq) +
                      " spectrogram");
  }
  if (time % patch_time != 0 || freq % patch_freq != 0) {
    throw ConfigError("patch " + std::to_string(patch_time) + "x" +
                      std::to_string(patch_freq) + " does not tile a " +
                      std::to_string(time) + "x" + std::to_string(freq) +
                      " spectrogram");
  }
  const int nt = time / patch_time, nf = freq / patch_freq;
  const auto pdim = static_cast<std::size_t>(patch_time * patch_freq);
  Tensor<T> out(Shape{static_cast<std::size_t>(nt * nf), pdim});
  std::size_t idx = 0;
  for (int pt = 0; pt < nt; ++pt) {
    for (int pf = 0; pf < nf; ++pf, ++idx) {
      std::size_t k = 0;
      for (int t = 0; t < patch_time; ++t)
        for (int f = 0; f < patch_freq; ++f, ++k)
          out.at(idx, k) = spec.at(static_cast<std::size_t>(pt * patch_time + t),
                                   static_cast<std::size_t>(pf * patch_freq + f));
    }
  }
  return out;
}

template <Real T>
Tensor<T> assemble_patches(const Tensor<T>& patches, int time, int freq,
                           int patch_time, int patch_freq) {
  if (patch_time <= 0 || patch_freq <= 0 || time % patch_time != 0 ||
      freq % patch_freq != 0) {
    throw ConfigError("assemble_patches: patch does not tile the output");
  }
  const int nt = time / patch_time, nf = freq / patch_freq;
  if (patches.rank() != 2 ||
      patches.dim(0) != static_cast<std::size_t>(nt * nf) ||
      patches.dim(1) != static_cast<std::size_t>(patch_time * patch_freq)) {
    throw ConfigError("assemble_patches: patch tensor shape " +
                      shape_string(patches.shape()) + " does not match grid");
  }
  Tensor<T> out(Shape{static_cast<std::size_t>(time), static_cast<std::size_t>(freq)});
  std::size_t idx = 0;
  for (int pt = 0; pt < nt; ++pt) {
    for (int pf = 0; pf < nf; ++pf, ++idx) {
      std::size_t k = 0;
      for (int t = 0; t < patch_time; ++t)
        for (int f = 0; f < patch_freq; ++f, ++k)
          out.at(static_cast<std::size_t>(pt * patch_time + t),
                 static_cast<std::size_t>(pf * patch_freq + f)) = patches.at(idx, k);
    }
  }
  return out;
}

template <Real T>
Tensor<T> embed_input(const Tensor<T>& patches, const KWTParams<T>& params,
                      const KWTConfig& cfg) {
  if (patches.rank() != 2 ||
      patches.dim(1) != static_cast<std::size_t>(cfg.patch_dim()) ||
      patches.dim(0) != static_cast<std::size_t>(cfg.num_patches())) {
    throw InputError("embed_input: patches " + shape_string(patches.shape()) +
                     " do not match the model's patch grid");
  }
  const Tensor<T> projected = linear(patches, params.embed.weight, params.embed.bias);
  const std::size_t d = static_cast<std::size_t>(cfg.dim);
  const std::size_t special = static_cast<std::size_t>(cfg.special_tokens());
  Tensor<T> x(Shape{patches.dim(0) + special, d});
  for (std::size_t j = 0; j < d; ++j) {
    x.at(0, j) = params.class_token[j];
    if (cfg.distill_token) x.at(1, j) = params.distill_token[j];
  }
  for (std::size_t r = 0; r < patches.dim(0); ++r)
    for (std::size_t j = 0; j < d; ++j) x.at(r + special, j) = projected.at(r, j);
  add_inplace(x, params.pos_embed);
  return x;
}

// ---------------------------------------------------------------------------
// Attention

namespace {

template <Real T>
Tensor<T> slice_cols(const Tensor<T>& x, std::size_t start, std::size_t width) {
  Tensor<T> out(Shape{x.rows(), width});
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t j = 0; j < width; ++j) out.at(r, j) = x.at(r, start + j);
  return out;
}

template <Real T>
void put_cols(Tensor<T>& x, std::size_t start, const Tensor<T>& src) {
  for (std::size_t r = 0; r < src.rows(); ++r)
    for (std::size_t j = 0; j < src.cols(); ++j) x.at(r, start + j) = src.at(r, j);
}

}  // namespace

template <Real T>
Tensor<T> scaled_dot_attention(const Tensor<T>& q, const Tensor<T>& k,
                               const Tensor<T>& v, Tensor<T>* probs) {
  Tensor<T> scores = matmul_nt(q, k);
  const T scale = T(1) / std::sqrt(static_cast<T>(q.cols()));
  for (T& s : scores.values()) s *= scale;
  Tensor<T> p = softmax(scores, -1);
  Tensor<T> out = matmul(p, v);
  if (probs) *probs = std::move(p);
  return out;
}

template <Real T>
AttentionGrads<T> scaled_dot_attention_backward(const Tensor<T>& q,
                                                const Tensor<T>& k,
                                                const Tensor<T>& v,
                                                const Tensor<T>& probs,
                                                const Tensor<T>& dout) {
  AttentionGrads<T> g;
  g.dv = matmul_tn(probs, dout);
  const Tensor<T> dprobs = matmul_nt(dout, v);
  Tensor<T> dscores = softmax_backward(probs, dprobs, -1);
  const T scale = T(1) / std::sqrt(static_cast<T>(q.cols()));
  for (T& s : dscores.values()) s *= scale;
  g.dq = matmul(dscores, k);
  g.dk = matmul_tn(dscores, q);
  return g;
}

template <Real T>
Tensor<T> self_attention(const Tensor<T>& x, const Tensor<T>& w_q,
                         const Tensor<T>& w_k, const Tensor<T>& w_v,
                         Tensor<T>* probs) {
  return scaled_dot_attention(matmul(x, w_q), matmul(x, w_k), matmul(x, w_v),
                              probs);
}

template <Real T>
Tensor<T> multi_head_attention(const Tensor<T>& x,
                               const EncoderLayerParams<T>& layer, int heads,
                               MsaCache<T>* cache) {
  const std::size_t d = x.cols();
  const std::size_t dh = d / static_cast<std::size_t>(heads);
  Tensor<T> qkv = linear(x, layer.qkv.weight, layer.qkv.bias);
  Tensor<T> concat(Shape{x.rows(), d});
  if (cache) cache->probs.assign(static_cast<std::size_t>(heads), Tensor<T>());
  for (std::size_t h = 0; h < static_cast<std::size_t>(heads); ++h) {
    const Tensor<T> q = slice_cols(qkv, h * dh, dh);
    const Tensor<T> k = slice_cols(qkv, d + h * dh, dh);
    const Tensor<T> v = slice_cols(qkv, 2 * d + h * dh, dh);
    Tensor<T> out = scaled_dot_attention(q, k, v, cache ? &cache->probs[h] : nullptr);
    put_cols(concat, h * dh, out);
  }
  Tensor<T> y = linear(concat, layer.proj.weight, layer.proj.bias);
  if (cache) {
    cache->input = x;
    cache->qkv = std::move(qkv);
    cache->concat = std::move(concat);
  }
  return y;
}

template <Real T>
Tensor<T> multi_head_attention_backward(const Tensor<T>& dout,
                                        const EncoderLayerParams<T>& layer,
                                        int heads, const MsaCache<T>& cache,
                                        EncoderLayerParams<T>& grads) {
  const std::size_t d = cache.input.cols();
  const std::size_t dh = d / static_cast<std::size_t>(heads);
  const Tensor<T> dconcat = linear_backward(cache.concat, layer.proj.weight, dout,
                                            grads.proj.weight, grads.proj.bias);
  Tensor<T> dqkv(cache.qkv.shape());
  for (std::size_t h = 0; h < static_cast<std::size_t>(heads); ++h) {
    const Tensor<T> q = slice_cols(cache.qkv, h * dh, dh);
    const Tensor<T> k = slice_cols(cache.qkv, d + h * dh, dh);
    const Tensor<T> v = slice_cols(cache.qkv, 2 * d + h * dh, dh);
    const Tensor<T> dh_out = slice_cols(dconcat, h * dh, dh);
    const AttentionGrads<T> g =
        scaled_dot_attention_backward(q, k, v, cache.probs[h], dh_out);
    put_cols(dqkv, h * dh, g.dq);
    put_cols(dqkv, d + h * dh, g.dk);
    put_cols(dqkv, 2 * d + h * dh, g.dv);
  }
  return linear_backward(cache.input, layer.qkv.weight, dqkv,
                         grads.qkv.weight, grads.qkv.bias);
}

// ---------------------------------------------------------------------------
// Encoder block

namespace {

template <Real T>
Tensor<T> mlp_forward(const Tensor<T>& x, const EncoderLayerParams<T>& layer,
                      BlockCache<T>* cache) {
  Tensor<T> pre = linear(x, layer.fc1.weight, layer.fc1.bias);
  Tensor<T> act = gelu(pre);
  Tensor<T> y = linear(act, layer.fc2.weight, layer.fc2.bias);
  if (cache) {
    cache->mlp_input = x;
    cache->hidden_pre = std::move(pre);
    cache->hidden_act = std::move(act);
  }
  return y;
}

template <Real T>
Tensor<T> mlp_backward(const Tensor<T>& dout, const EncoderLayerParams<T>& layer,
                       const BlockCache<T>& cache, EncoderLayerParams<T>& grads) {
  const Tensor<T> dact = linear_backward(cache.hidden_act, layer.fc2.weight, dout,
                                         grads.fc2.weight, grads.fc2.bias);
  const Tensor<T> dpre = gelu_backward(cache.hidden_pre, dact);
  return linear_backward(cache.mlp_input, layer.fc1.weight, dpre,
                         grads.fc1.weight, grads.fc1.bias);
}

}  // namespace

template <Real T>
Tensor<T> encoder_block(const Tensor<T>& x, const EncoderLayerParams<T>& layer,
                        const KWTConfig& cfg, BlockCache<T>* cache) {
  const T eps = static_cast<T>(cfg.ln_eps);
  MsaCache<T>* msa_cache = cache ? &cache->msa : nullptr;
  LayerNormCache<T>* n1 = cache ? &cache->norm1 : nullptr;
  LayerNormCache<T>* n2 = cache ? &cache->norm2 : nullptr;
  if (cfg.norm_mode == NormMode::kPostNorm) {
    Tensor<T> r1 = multi_head_attention(x, layer, cfg.heads, msa_cache);
    add_inplace(r1, x);
    const Tensor<T> x1 = layer_norm(r1, layer.norm1.gamma, layer.norm1.beta, eps, n1);
    Tensor<T> r2 = mlp_forward(x1, layer, cache);
    add_inplace(r2, x1);
    return layer_norm(r2, layer.norm2.gamma, layer.norm2.beta, eps, n2);
  }
  const Tensor<T> h1 = layer_norm(x, layer.norm1.gamma, layer.norm1.beta, eps, n1);
  Tensor<T> x1 = multi_head_attention(h1, layer, cfg.heads, msa_cache);
  add_inplace(x1, x);
  const Tensor<T> h2 = layer_norm(x1, layer.norm2.gamma, layer.norm2.beta, eps, n2);
  Tensor<T> out = mlp_forward(h2, layer, cache);
  add_inplace(out, x1);
  return out;
}

template <Real T>
Tensor<T> encoder_block_backward(const Tensor<T>& dout,
                                 const EncoderLayerParams<T>& layer,
                                 const KWTConfig& cfg,
                                 const BlockCache<T>& cache,
                                 EncoderLayerParams<T>& grads) {
  if (cfg.norm_mode == NormMode::kPostNorm) {
    const Tensor<T> dr2 = layer_norm_backward(dout, cache.norm2, layer.norm2.gamma,
                                              grads.norm2.gamma, grads.norm2.beta);
    Tensor<T> dx1 = mlp_backward(dr2, layer, cache, grads);
    add_inplace(dx1, dr2);
    const Tensor<T> dr1 = layer_norm_backward(dx1, cache.norm1, layer.norm1.gamma,
                                              grads.norm1.gamma, grads.norm1.beta);
    Tensor<T> dx = multi_head_attention_backward(dr1, layer, cfg.heads, cache.msa, grads);
    add_inplace(dx, dr1);
    return dx;
  }
  const Tensor<T> dh2 = mlp_backward(dout, layer, cache, grads);
  Tensor<T> dx1 = layer_norm_backward(dh2, cache.norm2, layer.norm2.gamma,
                                      grads.norm2.gamma, grads.norm2.beta);
  add_inplace(dx1, dout);
  const Tensor<T> dh1 = multi_head_attention_backward(dx1, layer, cfg.heads, cache.msa, grads);
  Tensor<T> dx = layer_norm_backward(dh1, cache.norm1, layer.norm1.gamma,
                                     grads.norm1.gamma, grads.norm1.beta);
  add_inplace(dx, dx1);
  return dx;
}

// ---------------------------------------------------------------------------
// Full model

namespace {

template <Real T>
Tensor<T> head_logits(const Tensor<T>& out, std::size_t row,
                      const LinearParams<T>& head) {
  Tensor<T> token(Shape{1, out.cols()});
  for (std::size_t j = 0; j < out.cols(); ++j) token[j] = out.at(row, j);
  Tensor<T> logits = linear(token, head.weight, head.bias);
  logits.reshape(Shape{head.weight.cols()});
  return logits;
}

}  // namespace

template <Real T>
ForwardResult<T> forward(const KWTModel<T>& model, const Tensor<T>& spec,
                         bool record_attention, ForwardCache<T>* cache) {
  const KWTConfig& cfg = model.config;
  if (spec.rank() != 2 || spec.dim(0) != static_cast<std::size_t>(cfg.input_time) ||
      spec.dim(1) != static_cast<std::size_t>(cfg.input_freq)) {
    throw InputError("forward: spectrogram " + shape_string(spec.shape()) +
                     " does not match model input " +
                     std::to_string(cfg.input_time) + "x" +
                     std::to_string(cfg.input_freq));
  }
  Tensor<T> patches = extract_patches(spec, cfg.patch_time, cfg.patch_freq);
  Tensor<T> x = embed_input(patches, model.params, cfg);

  ForwardResult<T> result;
  if (cache) cache->blocks.assign(model.params.layers.size(), BlockCache<T>());
  // Attention probabilities live in the block cache, so recording without a
  // caller-provided cache uses a scratch one per layer.
  BlockCache<T> scratch;
  for (std::size_t l = 0; l < model.params.layers.size(); ++l) {
    BlockCache<T>* bc = cache ? &cache->blocks[l] : (record_attention ? &scratch : nullptr);
    x = encoder_block(x, model.params.layers[l], cfg, bc);
    if (record_attention) {
      const std::size_t n = x.rows();
      AttentionRecord<T> rec;
      rec.layer = static_cast<int>(l);
      rec.weights = Tensor<T>(Shape{static_cast<std::size_t>(cfg.heads), n, n});
      for (std::size_t h = 0; h < static_cast<std::size_t>(cfg.heads); ++h) {
        const Tensor<T>& p = bc->msa.probs[h];
        std::copy(p.values().begin(), p.values().end(),
                  rec.weights.values().begin() + static_cast<std::ptrdiff_t>(h * n * n));
      }
      result.attention.push_back(std::move(rec));
    }
  }
  result.logits = head_logits(x, 0, model.params.head);
  if (cfg.distill_token) result.distill_logits = head_logits(x, 1, model.params.distill_head);
  if (cache) {
    cache->patches = std::move(patches);
    cache->output = std::move(x);
  }
  return result;
}

template <Real T>
ForwardResult<T> forward(const KWTModel<T>& model, const Spectrogram& spec,
                         bool record_attention) {
  return forward(model, spec.values.template cast<T>(), record_attention);
}

template <Real T>
void backward(const KWTModel<T>& model, const ForwardCache<T>& cache,
              const Tensor<T>& dlogits, const Tensor<T>* ddistill,
              KWTParams<T>& grads) {
  const KWTConfig& cfg = model.config;
  if (cfg.distill_token != (ddistill != nullptr)) {
    throw ConfigError(cfg.distill_token
                          ? "backward: distillation logits gradient missing"
                          : "backward: model has no distillation token");
  }
  const std::size_t d = static_cast<std::size_t>(cfg.dim);
  Tensor<T> dx(cache.output.shape());

  auto head_back = [&](std::size_t row, const LinearParams<T>& head,
                       LinearParams<T>& ghead, const Tensor<T>& dz) {
    Tensor<T> token(Shape{1, d});
    for (std::size_t j = 0; j < d; ++j) token[j] = cache.output.at(row, j);
    Tensor<T> dz2 = dz;
    dz2.reshape(Shape{1, dz.size()});
    const Tensor<T> dtoken = linear_backward(token, head.weight, dz2, ghead.weight, ghead.bias);
    for (std::size_t j = 0; j < d; ++j) dx.at(row, j) += dtoken[j];
  };
  head_back(0, model.params.head, grads.head, dlogits);
  if (ddistill) head_back(1, model.params.distill_head, grads.distill_head, *ddistill);

  for (std::size_t l = model.params.layers.size(); l-- > 0;) {
    dx = encoder_block_backward(dx, model.params.layers[l], cfg, cache.blocks[l],
                                grads.layers[l]);
  }

  add_inplace(grads.pos_embed, dx);
  const std::size_t special = static_cast<std::size_t>(cfg.special_tokens());
  for (std::size_t j = 0; j < d; ++j) {
    grads.class_token[j] += dx.at(0, j);
    if (cfg.distill_token) grads.distill_token[j] += dx.at(1, j);
  }
  Tensor<T> dproj(Shape{dx.rows() - special, d});
  for (std::size_t r = 0; r < dproj.rows(); ++r)
    for (std::size_t j = 0; j < d; ++j) dproj.at(r, j) = dx.at(r + special, j);
  linear_backward(cache.patches, model.params.embed.weight, dproj,
                  grads.embed.weight, grads.embed.bias);
}

// ---------------------------------------------------------------------------
// Instantiations

#define KWT_INSTANTIATE_MODEL(T)                                                \
  template struct KWTParams<T>;                                                 \
  template struct KWTModel<T>;                                                  \
  template Tensor<T> extract_patches(const Tensor<T>&, int, int);               \
  template Tensor<T> assemble_patches(const Tensor<T>&, int, int, int, int);    \
  template Tensor<T> embed_input(const Tensor<T>&, const KWTParams<T>&,         \
                                 const KWTConfig&);                             \
  template Tensor<T> scaled_dot_attention(const Tensor<T>&, const Tensor<T>&,   \
                                          const Tensor<T>&, Tensor<T>*);        \
  template AttentionGrads<T> scaled_dot_attention_backward(                     \
      const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,   \
      const Tensor<T>&);                                                        \
  template Tensor<T> self_attention(const Tensor<T>&, const Tensor<T>&,         \
                                    const Tensor<T>&, const Tensor<T>&,         \
                                    Tensor<T>*);                                \
  template Tensor<T> multi_head_attention(const Tensor<T>&,                     \
                                          const EncoderLayerParams<T>&, int,    \
                                          MsaCache<T>*);                        \
  template Tensor<T> multi_head_attention_backward(                             \
      const Tensor<T>&, const EncoderLayerParams<T>&, int, const MsaCache<T>&,  \
      EncoderLayerParams<T>&);                                                  \
  template Tensor<T> encoder_block(const Tensor<T>&,                            \
                                   const EncoderLayerParams<T>&,                \
                                   const KWTConfig&, BlockCache<T>*);           \
  template Tensor<T> encoder_block_backward(                                    \
      const Tensor<T>&, const EncoderLayerParams<T>&, const KWTConfig&,         \
      const BlockCache<T>&, EncoderLayerParams<T>&);                            \
  template ForwardResult<T> forward(const KWTModel<T>&, const Tensor<T>&, bool, \
                                    ForwardCache<T>*);                          \
  template ForwardResult<T> forward(const KWTModel<T>&, const Spectrogram&,     \
                                    bool);                                      \
  template void backward(const KWTModel<T>&, const ForwardCache<T>&,            \
                         const Tensor<T>&, const Tensor<T>*, KWTParams<T>&);

KWT_INSTANTIATE_MODEL(float)
KWT_INSTANTIATE_MODEL(double)

#undef KWT_INSTANTIATE_MODEL

template KWTModel<double> KWTModel<float>::cast<double>() const;
template KWTModel<float> KWTModel<double>::cast<float>() const;
template KWTModel<float> KWTModel<float>::cast<float>() const;
template KWTModel<double> KWTModel<double>::cast<double>() const;

}  // namespace kwt
