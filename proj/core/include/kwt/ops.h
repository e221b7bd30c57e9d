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

#include <span>
#include <vector>

#include "kwt/tensor.h"

namespace kwt {

// Matrix products on the trailing two axes viewed as [rows, cols].
template <Real T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);  // a · b
template <Real T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b);  // a · bᵀ
template <Real T>
Tensor<T> matmul_tn(const Tensor<T>& a, const Tensor<T>& b);  // aᵀ · b

// out += a, elementwise.
template <Real T>
void add_inplace(Tensor<T>& out, const Tensor<T>& a);

// y = x · W + b with W: [in, out], b: [out].
template <Real T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias);

// Accumulates dW, db into the given tensors; returns dx.
template <Real T>
Tensor<T> linear_backward(const Tensor<T>& x, const Tensor<T>& weight,
                          const Tensor<T>& dy, Tensor<T>& dweight,
                          Tensor<T>& dbias);

template <Real T>
struct LayerNormCache {
  Tensor<T> normalized;  // pre-affine output
  std::vector<T> inv_std;
};

// Normalizes over the last axis. When `cache` is non-null the statistics
// needed by layer_norm_backward are retained.
template <Real T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma,
                     const Tensor<T>& beta, T eps,
                     LayerNormCache<T>* cache = nullptr);

template <Real T>
Tensor<T> layer_norm_backward(const Tensor<T>& dy,
                              const LayerNormCache<T>& cache,
                              const Tensor<T>& gamma, Tensor<T>& dgamma,
                              Tensor<T>& dbeta);

// Numerically stable softmax along `axis` (negative counts from the back).
template <Real T>
Tensor<T> softmax(const Tensor<T>& x, int axis = -1);

template <Real T>
Tensor<T> softmax_backward(const Tensor<T>& y, const Tensor<T>& dy,
                           int axis = -1);

// Exact erf form: x·Φ(x).
template <Real T>
Tensor<T> gelu(const Tensor<T>& x);

template <Real T>
Tensor<T> gelu_backward(const Tensor<T>& x, const Tensor<T>& dy);

template <Real T>
struct LossResult {
  T loss = T(0);
  Tensor<T> dlogits;  // d(loss)/d(logits), same shape as the logits
};

// Batch-mean cross entropy against a label-smoothed one-hot target: the
// target class gets 1 - s + s/C, every other class s/C.
template <Real T>
LossResult<T> cross_entropy_smoothed(const Tensor<T>& logits,
                                     std::span<const int> targets,
                                     T smoothing);

}  // namespace kwt
