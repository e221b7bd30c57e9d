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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kwt/frontend.h"
#include "kwt/ops.h"
#include "kwt/tensor.h"

namespace kwt {

enum class NormMode { kPostNorm, kPreNorm };

std::string_view to_string(NormMode mode);
NormMode parse_norm_mode(std::string_view name);

struct KWTConfig {
  int dim = 64;
  int mlp_dim = 256;
  int heads = 1;
  int layers = 12;
  int patch_time = 1;
  int patch_freq = 40;
  int num_classes = 12;
  NormMode norm_mode = NormMode::kPostNorm;
  bool distill_token = false;
  int input_time = 98;
  int input_freq = 40;
  double ln_eps = 1e-6;

  int head_dim() const { return dim / heads; }
  int patch_dim() const { return patch_time * patch_freq; }
  int num_patches() const {
    return (input_time / patch_time) * (input_freq / patch_freq);
  }
  // Class token, optional distillation token, then one per patch.
  int special_tokens() const { return distill_token ? 2 : 1; }
  int num_tokens() const { return num_patches() + special_tokens(); }

  // Throws ConfigError when the configuration cannot be instantiated.
  void validate() const;

  static KWTConfig kwt1();
  static KWTConfig kwt2();
  static KWTConfig kwt3();
  // Desk-scale model: d=32, two heads, two layers.
  static KWTConfig micro();
  // "kwt1" | "kwt2" | "kwt3" | "micro".
  static KWTConfig preset(std::string_view name);

  friend bool operator==(const KWTConfig&, const KWTConfig&) = default;
};

// Exact number of learnable scalars of the instantiated model.
std::int64_t count_parameters(const KWTConfig& cfg);

template <Real T>
struct LinearParams {
  Tensor<T> weight;  // [in, out]
  Tensor<T> bias;    // [out]
};

template <Real T>
struct NormParams {
  Tensor<T> gamma;
  Tensor<T> beta;
};

template <Real T>
struct EncoderLayerParams {
  // Fused per-head projections: columns [0, d) are the queries of heads
  // 0..k-1 in order, [d, 2d) the keys, [2d, 3d) the values.
  LinearParams<T> qkv;
  LinearParams<T> proj;  // W_P
  NormParams<T> norm1;
  LinearParams<T> fc1;
  LinearParams<T> fc2;
  NormParams<T> norm2;
};

template <Real T>
struct KWTParams {
  LinearParams<T> embed;   // W_0
  Tensor<T> class_token;   // [1, d]
  Tensor<T> distill_token; // [1, d]; empty without distillation
  Tensor<T> pos_embed;     // [num_tokens, d]
  std::vector<EncoderLayerParams<T>> layers;
  LinearParams<T> head;
  LinearParams<T> distill_head;  // empty without distillation

  // Zero-filled parameters shaped for `cfg`.
  static KWTParams zeros(const KWTConfig& cfg);

  // Visits every learnable tensor in a fixed canonical order.
  void visit(const std::function<void(const std::string&, Tensor<T>&)>& fn);
  void visit(const std::function<void(const std::string&, const Tensor<T>&)>&
                 fn) const;
  std::vector<Tensor<T>*> tensors();
  std::int64_t scalar_count() const;
  void set_zero();
  // this += other, tensor by tensor.
  void accumulate(const KWTParams& other);
  void scale(T factor);
};

template <Real T>
struct KWTModel {
  KWTConfig config;
  KWTParams<T> params;

  // Truncated normal (σ=0.02) weights, tokens and positional embeddings;
  // zero biases; unit LN gain.
  static KWTModel init(const KWTConfig& cfg, std::uint64_t seed);

  template <Real U>
  KWTModel<U> cast() const;
};

// Splits a [T, F] matrix into non-overlapping t_p×f_p patches, patches
// ordered time-major and each flattened row-major: [N, t_p·f_p].
template <Real T>
Tensor<T> extract_patches(const Tensor<T>& spec, int patch_time,
                          int patch_freq);
template <Real T>
Tensor<T> assemble_patches(const Tensor<T>& patches, int time, int freq,
                           int patch_time, int patch_freq);

// X_0 = [X_class; (X_distill;) patches·W_0 + b] + X_pos.
template <Real T>
Tensor<T> embed_input(const Tensor<T>& patches, const KWTParams<T>& params,
                      const KWTConfig& cfg);

// softmax(Q·Kᵀ/√d_h)·V. Writes the attention probabilities to `probs`
// when given.
template <Real T>
Tensor<T> scaled_dot_attention(const Tensor<T>& q, const Tensor<T>& k,
                               const Tensor<T>& v, Tensor<T>* probs = nullptr);

template <Real T>
struct AttentionGrads {
  Tensor<T> dq, dk, dv;
};

template <Real T>
AttentionGrads<T> scaled_dot_attention_backward(const Tensor<T>& q,
                                                const Tensor<T>& k,
                                                const Tensor<T>& v,
                                                const Tensor<T>& probs,
                                                const Tensor<T>& dout);

// Single head without biases: softmax((XW_Q)(XW_K)ᵀ/√d_h)(XW_V).
template <Real T>
Tensor<T> self_attention(const Tensor<T>& x, const Tensor<T>& w_q,
                         const Tensor<T>& w_k, const Tensor<T>& w_v,
                         Tensor<T>* probs = nullptr);

template <Real T>
struct MsaCache {
  Tensor<T> input;
  Tensor<T> qkv;
  std::vector<Tensor<T>> probs;  // one [N, N] per head
  Tensor<T> concat;
};

template <Real T>
Tensor<T> multi_head_attention(const Tensor<T>& x,
                               const EncoderLayerParams<T>& layer, int heads,
                               MsaCache<T>* cache = nullptr);

// Accumulates into grads.qkv/grads.proj; returns dX.
template <Real T>
Tensor<T> multi_head_attention_backward(const Tensor<T>& dout,
                                        const EncoderLayerParams<T>& layer,
                                        int heads, const MsaCache<T>& cache,
                                        EncoderLayerParams<T>& grads);

template <Real T>
struct BlockCache {
  MsaCache<T> msa;
  LayerNormCache<T> norm1;
  LayerNormCache<T> norm2;
  Tensor<T> mlp_input;
  Tensor<T> hidden_pre;
  Tensor<T> hidden_act;
};

// PostNorm: X̃ = LN(MSA(X) + X), X' = LN(MLP(X̃) + X̃).
// PreNorm:  X̃ = X + MSA(LN(X)),  X' = X̃ + MLP(LN(X̃)).
template <Real T>
Tensor<T> encoder_block(const Tensor<T>& x, const EncoderLayerParams<T>& layer,
                        const KWTConfig& cfg, BlockCache<T>* cache = nullptr);

template <Real T>
Tensor<T> encoder_block_backward(const Tensor<T>& dout,
                                 const EncoderLayerParams<T>& layer,
                                 const KWTConfig& cfg,
                                 const BlockCache<T>& cache,
                                 EncoderLayerParams<T>& grads);

template <Real T>
struct AttentionRecord {
  int layer = 0;
  Tensor<T> weights;  // [heads, tokens, tokens]
};

template <Real T>
struct ForwardResult {
  Tensor<T> logits;  // [C]
  std::optional<Tensor<T>> distill_logits;
  std::vector<AttentionRecord<T>> attention;
};

template <Real T>
struct ForwardCache {
  Tensor<T> patches;
  std::vector<BlockCache<T>> blocks;
  Tensor<T> output;  // final encoder output, [tokens, d]
};

// Takes the [T, F] spectrogram matrix. `cache` retains activations for
// backward(); attention records are collected when `record_attention`.
template <Real T>
ForwardResult<T> forward(const KWTModel<T>& model, const Tensor<T>& spec,
                         bool record_attention = false,
                         ForwardCache<T>* cache = nullptr);

template <Real T>
ForwardResult<T> forward(const KWTModel<T>& model, const Spectrogram& spec,
                         bool record_attention = false);

// Backpropagates logit gradients through the cached forward pass and adds
// the parameter gradients into `grads`. `ddistill` is required exactly when
// the model has a distillation token.
template <Real T>
void backward(const KWTModel<T>& model, const ForwardCache<T>& cache,
              const Tensor<T>& dlogits, const Tensor<T>* ddistill,
              KWTParams<T>& grads);

}  // namespace kwt
