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

#include "kwt/ops.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace kwt {

namespace {

template <Real T>
void require_matrix_compat(const Tensor<T>& a, std::size_t a_dim,
                           const Tensor<T>& b, std::size_t b_dim,
                           const char* op) {
  if (a_dim != b_dim) {
    throw ConfigError(std::string(op) + ": incompatible shapes " +
                      shape_string(a.shape()) + " and " +
                      shape_string(b.shape()));
  }
}

// c[m, n] += a[m, k] · b[k, n] over raw row-major buffers.
template <Real T>
void gemm_acc(const T* __restrict a, const T* __restrict b, T* __restrict c,
              std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <Real T>
Tensor<T> transpose2d(const Tensor<T>& x) {
  const std::size_t r = x.rows(), c = x.cols();
  Tensor<T> out(Shape{c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = x[i * c + j];
  return out;
}

Shape with_last(Shape shape, std::size_t last) {
  shape.back() = last;
  return shape;
}

}  // namespace

template <Real T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (b.rank() != 2) throw ConfigError("matmul: rhs must be a matrix");
  require_matrix_compat(a, a.cols(), b, b.dim(0), "matmul");
  Tensor<T> out(with_last(a.shape(), b.dim(1)));
  gemm_acc(a.values().data(), b.values().data(), out.values().data(),
           a.rows(), a.cols(), b.dim(1));
  return out;
}

template <Real T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
  require_matrix_compat(a, a.cols(), b, b.cols(), "matmul_nt");
  return matmul(a, transpose2d(b));
}

template <Real T>
Tensor<T> matmul_tn(const Tensor<T>& a, const Tensor<T>& b) {
  require_matrix_compat(a, a.rows(), b, b.rows(), "matmul_tn");
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  Tensor<T> out(Shape{m, n});
  T* c = out.values().data();
  for (std::size_t p = 0; p < k; ++p) {
    const T* arow = a.values().data() + p * m;
    const T* brow = b.values().data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T av = arow[i];
      T* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return out;
}

template <Real T>
void add_inplace(Tensor<T>& out, const Tensor<T>& a) {
  if (out.size() != a.size()) {
    throw ConfigError("add: shape mismatch " + shape_string(out.shape()) +
                      " vs " + shape_string(a.shape()));
  }
  T* o = out.values().data();
  const T* x = a.values().data();
  for (std::size_t i = 0; i < out.size(); ++i) o[i] += x[i];
}

template <Real T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias) {
  if (bias.size() != weight.cols()) {
    throw ConfigError("linear: bias length " + std::to_string(bias.size()) +
                      " does not match output width " +
                      std::to_string(weight.cols()));
  }
  Tensor<T> y = matmul(x, weight);
  const std::size_t n = y.cols();
  for (std::size_t r = 0; r < y.rows(); ++r) {
    T* row = y.values().data() + r * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += bias[j];
  }
  return y;
}

template <Real T>
Tensor<T> linear_backward(const Tensor<T>& x, const Tensor<T>& weight,
                          const Tensor<T>& dy, Tensor<T>& dweight,
                          Tensor<T>& dbias) {
  const std::size_t in = weight.dim(0), out = weight.dim(1);
  const std::size_t rows = x.rows();
  // dW += xᵀ dy
  T* dw = dweight.values().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.values().data() + r * in;
    const T* gr = dy.values().data() + r * out;
    for (std::size_t i = 0; i < in; ++i) {
      const T xv = xr[i];
      T* dwrow = dw + i * out;
      for (std::size_t j = 0; j < out; ++j) dwrow[j] += xv * gr[j];
    }
    for (std::size_t j = 0; j < out; ++j) dbias[j] += gr[j];
  }
  return matmul_nt(dy, weight);
}

template <Real T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma,
                     const Tensor<T>& beta, T eps, LayerNormCache<T>* cache) {
  const std::size_t d = x.cols();
  if (gamma.size() != d || beta.size() != d) {
    throw ConfigError("layer_norm: gamma/beta length must equal last axis " +
                      std::to_string(d));
  }
  if (!(eps > T(0))) throw ConfigError("layer_norm: eps must be positive");
  const std::size_t rows = x.rows();
  Tensor<T> y(x.shape());
  Tensor<T> normalized;
  if (cache) {
    normalized = Tensor<T>(x.shape());
    cache->inv_std.assign(rows, T(0));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.values().data() + r * d;
    T mean = 0;
    for (std::size_t i = 0; i < d; ++i) mean += xr[i];
    mean /= static_cast<T>(d);
    T var = 0;
    for (std::size_t i = 0; i < d; ++i) var += (xr[i] - mean) * (xr[i] - mean);
    var /= static_cast<T>(d);
    const T inv = T(1) / std::sqrt(var + eps);
    T* yr = y.values().data() + r * d;
    for (std::size_t i = 0; i < d; ++i) {
      const T n = (xr[i] - mean) * inv;
      if (cache) normalized[r * d + i] = n;
      yr[i] = n * gamma[i] + beta[i];
    }
    if (cache) cache->inv_std[r] = inv;
  }
  if (cache) cache->normalized = std::move(normalized);
  return y;
}

template <Real T>
Tensor<T> layer_norm_backward(const Tensor<T>& dy,
                              const LayerNormCache<T>& cache,
                              const Tensor<T>& gamma, Tensor<T>& dgamma,
                              Tensor<T>& dbeta) {
  const std::size_t d = dy.cols();
  const std::size_t rows = dy.rows();
  Tensor<T> dx(dy.shape());
  std::vector<T> dn(d);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* g = dy.values().data() + r * d;
    const T* n = cache.normalized.values().data() + r * d;
    T sum_dn = 0, sum_dn_n = 0;
    for (std::size_t i = 0; i < d; ++i) {
      dgamma[i] += g[i] * n[i];
      dbeta[i] += g[i];
      dn[i] = g[i] * gamma[i];
      sum_dn += dn[i];
      sum_dn_n += dn[i] * n[i];
    }
    const T inv_d = T(1) / static_cast<T>(d);
    const T inv = cache.inv_std[r];
    T* out = dx.values().data() + r * d;
    for (std::size_t i = 0; i < d; ++i) {
      out[i] = inv * (dn[i] - inv_d * sum_dn - n[i] * inv_d * sum_dn_n);
    }
  }
  return dx;
}

namespace {

struct AxisLayout {
  std::size_t outer, len, inner;
};

template <Real T>
AxisLayout axis_layout(const Tensor<T>& x, int axis) {
  const int rank = static_cast<int>(x.rank());
  const int a = axis < 0 ? rank + axis : axis;
  if (a < 0 || a >= rank) throw ConfigError("softmax: axis out of range");
  AxisLayout l{1, x.dim(static_cast<std::size_t>(a)), 1};
  for (int i = 0; i < a; ++i) l.outer *= x.dim(static_cast<std::size_t>(i));
  for (int i = a + 1; i < rank; ++i)
    l.inner *= x.dim(static_cast<std::size_t>(i));
  return l;
}

}  // namespace

template <Real T>
Tensor<T> softmax(const Tensor<T>& x, int axis) {
  const AxisLayout l = axis_layout(x, axis);
  Tensor<T> y(x.shape());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.len * l.inner + in;
      T mx = x[base];
      for (std::size_t i = 1; i < l.len; ++i)
        mx = std::max(mx, x[base + i * l.inner]);
      // The normalizer is accumulated in double so float rows still sum to 1
      // within a few ulps.
      double sum = 0;
      for (std::size_t i = 0; i < l.len; ++i) {
        const T e = std::exp(x[base + i * l.inner] - mx);
        y[base + i * l.inner] = e;
        sum += static_cast<double>(e);
      }
      for (std::size_t i = 0; i < l.len; ++i) {
        T& v = y[base + i * l.inner];
        v = static_cast<T>(static_cast<double>(v) / sum);
      }
    }
  }
  return y;
}

template <Real T>
Tensor<T> softmax_backward(const Tensor<T>& y, const Tensor<T>& dy, int axis) {
  const AxisLayout l = axis_layout(y, axis);
  Tensor<T> dx(y.shape());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.len * l.inner + in;
      T dot = 0;
      for (std::size_t i = 0; i < l.len; ++i) {
        const std::size_t k = base + i * l.inner;
        dot += y[k] * dy[k];
      }
      for (std::size_t i = 0; i < l.len; ++i) {
        const std::size_t k = base + i * l.inner;
        dx[k] = y[k] * (dy[k] - dot);
      }
    }
  }
  return dx;
}

template <Real T>
Tensor<T> gelu(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T v = x[i];
    y[i] = T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2));
  }
  return y;
}

template <Real T>
Tensor<T> gelu_backward(const Tensor<T>& x, const Tensor<T>& dy) {
  Tensor<T> dx(x.shape());
  const T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  const T inv_sqrt2pi = std::numbers::inv_sqrtpi_v<T> * inv_sqrt2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T v = x[i];
    const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
    const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * v * v);
    dx[i] = dy[i] * (cdf + v * pdf);
  }
  return dx;
}

template <Real T>
LossResult<T> cross_entropy_smoothed(const Tensor<T>& logits,
                                     std::span<const int> targets,
                                     T smoothing) {
  if (logits.rank() != 2) {
    throw ConfigError("cross_entropy: logits must be [batch, classes]");
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (targets.size() != batch) {
    throw InputError("cross_entropy: expected " + std::to_string(batch) +
                     " targets, got " + std::to_string(targets.size()));
  }
  if (!(smoothing >= T(0) && smoothing < T(1))) {
    throw ConfigError("cross_entropy: smoothing must lie in [0, 1)");
  }
  const T off = smoothing / static_cast<T>(classes);
  const T on = T(1) - smoothing + off;
  LossResult<T> result;
  result.dlogits = Tensor<T>(logits.shape());
  const T inv_b = T(1) / static_cast<T>(batch);
  T total = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int t = targets[b];
    if (t < 0 || static_cast<std::size_t>(t) >= classes) {
      throw InputError("cross_entropy: target " + std::to_string(t) +
                       " outside [0, " + std::to_string(classes) + ")");
    }
    const T* z = logits.values().data() + b * classes;
    T mx = z[0];
    for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, z[c]);
    T sum = 0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(z[c] - mx);
    const T log_sum = std::log(sum) + mx;
    T* g = result.dlogits.values().data() + b * classes;
    for (std::size_t c = 0; c < classes; ++c) {
      const T q = (static_cast<std::size_t>(t) == c) ? on : off;
      const T log_p = z[c] - log_sum;
      total -= q * log_p;
      g[c] = (std::exp(log_p) - q) * inv_b;
    }
  }
  result.loss = total * inv_b;
  return result;
}

#define KWT_INSTANTIATE_OPS(T)                                               \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> matmul_nt(const Tensor<T>&, const Tensor<T>&);          \
  template Tensor<T> matmul_tn(const Tensor<T>&, const Tensor<T>&);          \
  template void add_inplace(Tensor<T>&, const Tensor<T>&);                   \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&,              \
                            const Tensor<T>&);                               \
  template Tensor<T> linear_backward(const Tensor<T>&, const Tensor<T>&,     \
                                     const Tensor<T>&, Tensor<T>&,           \
                                     Tensor<T>&);                            \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&,          \
                                const Tensor<T>&, T, LayerNormCache<T>*);    \
  template Tensor<T> layer_norm_backward(const Tensor<T>&,                   \
                                         const LayerNormCache<T>&,           \
                                         const Tensor<T>&, Tensor<T>&,       \
                                         Tensor<T>&);                        \
  template Tensor<T> softmax(const Tensor<T>&, int);                         \
  template Tensor<T> softmax_backward(const Tensor<T>&, const Tensor<T>&,    \
                                      int);                                  \
  template Tensor<T> gelu(const Tensor<T>&);                                 \
  template Tensor<T> gelu_backward(const Tensor<T>&, const Tensor<T>&);      \
  template LossResult<T> cross_entropy_smoothed(const Tensor<T>&,            \
                                                std::span<const int>, T);

KWT_INSTANTIATE_OPS(float)
KWT_INSTANTIATE_OPS(double)

#undef KWT_INSTANTIATE_OPS

}  // namespace kwt
