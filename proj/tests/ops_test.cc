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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kwt/error.h"
#include "test_support.h"

namespace kwt {
namespace {

using testing::gradient_error;
using testing::probe;
using testing::random_tensor;

constexpr double kTol = 1e-4;

TEST(Tensor, RejectsEmptyAndZeroShapes) {
  EXPECT_THROW(Tensor<float>(Shape{}), ConfigError);
  EXPECT_THROW(Tensor<float>(Shape{3, 0}), ConfigError);
  EXPECT_THROW(Tensor<float>(Shape{2, 2}, std::vector<float>{1, 2, 3}), ConfigError);
}

TEST(Tensor, ReshapeKeepsDataAndChecksSize) {
  auto t = Tensor<double>::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  t.reshape({3, 2});
  EXPECT_EQ(t.at(2, 1), 6.0);
  EXPECT_THROW(t.reshape({4, 2}), ConfigError);
}

TEST(Tensor, GradSlotLifecycle) {
  Tensor<float> t({4});
  EXPECT_FALSE(t.has_grad());
  t.grad()[2] = 1.5f;
  EXPECT_TRUE(t.has_grad());
  t.zero_grad();
  EXPECT_EQ(t.grad()[2], 0.0f);
  EXPECT_THROW(t.set_grad({1.0f}), ConfigError);
  t.clear_grad();
  EXPECT_FALSE(t.has_grad());
}

TEST(Matmul, HandComputed) {
  const auto a = Tensor<double>::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  const auto b = Tensor<double>::matrix(3, 2, {7, 8, 9, 10, 11, 12});
  const auto c = matmul(a, b);
  EXPECT_EQ(c, Tensor<double>::matrix(2, 2, {58, 64, 139, 154}));
  const auto bt = Tensor<double>::matrix(2, 3, {7, 9, 11, 8, 10, 12});
  EXPECT_EQ(matmul_nt(a, bt), c);
  const auto at = Tensor<double>::matrix(3, 2, {1, 4, 2, 5, 3, 6});
  EXPECT_EQ(matmul_tn(at, b), c);
  EXPECT_THROW(matmul(a, a), ConfigError);
}

TEST(Softmax, HandComputedPair) {
  const auto y = softmax(Tensor<double>::from({0.0, std::log(3.0)}));
  EXPECT_NEAR(y[0], 0.25, 1e-15);
  EXPECT_NEAR(y[1], 0.75, 1e-15);
}

TEST(Softmax, StableForLargeLogitsAndAlongAxisZero) {
  const auto y = softmax(Tensor<float>::from({1000.0f, 1000.0f}));
  EXPECT_FLOAT_EQ(y[0], 0.5f);
  const auto x = random_tensor({3, 5}, 1);
  const auto s0 = softmax(x, 0);
  for (std::size_t c = 0; c < 5; ++c) {
    double col = 0.0;
    for (std::size_t r = 0; r < 3; ++r) col += s0.at(r, c);
    EXPECT_NEAR(col, 1.0, 1e-12);
  }
  EXPECT_THROW(softmax(x, 2), ConfigError);
}

TEST(Gelu, MatchesErfDefinition) {
  for (double x : {-3.0, -0.5, 0.0, 0.7, 2.5}) {
    const double expected = 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
    EXPECT_NEAR(gelu(Tensor<double>::from({x}))[0], expected, 1e-15);
  }
}

TEST(LayerNorm, ZeroMeanUnitVariance) {
  const auto x = random_tensor({4, 16}, 2, 3.0);
  const Tensor<double> gamma({16}, 1.0), beta({16}, 0.0);
  const auto y = layer_norm(x, gamma, beta, 1e-12);
  for (std::size_t r = 0; r < 4; ++r) {
    double mean = 0.0, var = 0.0;
    for (double v : y.row(r)) mean += v;
    mean /= 16;
    for (double v : y.row(r)) var += (v - mean) * (v - mean);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var / 16, 1.0, 1e-9);
  }
  EXPECT_THROW(layer_norm(x, Tensor<double>({3}), beta, 1e-6), ConfigError);
}

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  const Tensor<double> z({2, 4}, 0.0);
  const std::vector<int> y{0, 3};
  EXPECT_NEAR(cross_entropy_smoothed(z, y, 0.0).loss, std::log(4.0), 1e-14);
  EXPECT_NEAR(cross_entropy_smoothed(z, y, 0.1).loss, std::log(4.0), 1e-14);
}

TEST(CrossEntropy, MatchesDirectSmoothedSum) {
  const auto z = random_tensor({3, 5}, 3);
  const std::vector<int> y{4, 0, 2};
  const double s = 0.1;
  double expected = 0.0;
  for (std::size_t b = 0; b < 3; ++b) {
    double norm = 0.0;
    for (double v : z.row(b)) norm += std::exp(v);
    for (std::size_t c = 0; c < 5; ++c) {
      const double q = (static_cast<int>(c) == y[b] ? 1.0 - s : 0.0) + s / 5.0;
      expected -= q * (z.at(b, c) - std::log(norm));
    }
  }
  EXPECT_NEAR(cross_entropy_smoothed(z, y, s).loss, expected / 3.0, 1e-12);
}

TEST(CrossEntropy, RejectsBadTargetsAndSmoothing) {
  const Tensor<double> z({1, 3}, 0.0);
  EXPECT_THROW(cross_entropy_smoothed(z, std::vector<int>{3}, 0.0), InputError);
  EXPECT_THROW(cross_entropy_smoothed(z, std::vector<int>{-1}, 0.0), InputError);
  EXPECT_THROW(cross_entropy_smoothed(z, std::vector<int>{0, 1}, 0.0), InputError);
  EXPECT_THROW(cross_entropy_smoothed(z, std::vector<int>{0}, 1.0), ConfigError);
}

TEST(Gradients, Linear) {
  auto x = random_tensor({4, 5}, 10);
  auto w = random_tensor({5, 3}, 11);
  auto b = random_tensor({3}, 12);
  const auto r = random_tensor({4, 3}, 13);
  Tensor<double> dw({5, 3}), db({3});
  const auto dx = linear_backward(x, w, r, dw, db);
  auto loss = [&] { return probe(linear(x, w, b), r); };
  EXPECT_LT(gradient_error(x, dx.values(), loss), kTol);
  EXPECT_LT(gradient_error(w, dw.values(), loss), kTol);
  EXPECT_LT(gradient_error(b, db.values(), loss), kTol);
}

TEST(Gradients, LayerNorm) {
  auto x = random_tensor({3, 6}, 20);
  auto gamma = random_tensor({6}, 21);
  auto beta = random_tensor({6}, 22);
  const auto r = random_tensor({3, 6}, 23);
  LayerNormCache<double> cache;
  layer_norm(x, gamma, beta, 1e-6, &cache);
  Tensor<double> dgamma({6}), dbeta({6});
  const auto dx = layer_norm_backward(r, cache, gamma, dgamma, dbeta);
  auto loss = [&] { return probe(layer_norm(x, gamma, beta, 1e-6), r); };
  EXPECT_LT(gradient_error(x, dx.values(), loss), kTol);
  EXPECT_LT(gradient_error(gamma, dgamma.values(), loss), kTol);
  EXPECT_LT(gradient_error(beta, dbeta.values(), loss), kTol);
}

TEST(Gradients, SoftmaxBothAxes) {
  for (int axis : {-1, 0}) {
    auto x = random_tensor({4, 5}, 30);
    const auto r = random_tensor({4, 5}, 31);
    const auto dx = softmax_backward(softmax(x, axis), r, axis);
    auto loss = [&] { return probe(softmax(x, axis), r); };
    EXPECT_LT(gradient_error(x, dx.values(), loss), kTol) << "axis " << axis;
  }
}

TEST(Gradients, Gelu) {
  auto x = random_tensor({3, 7}, 40, 2.0);
  const auto r = random_tensor({3, 7}, 41);
  const auto dx = gelu_backward(x, r);
  auto loss = [&] { return probe(gelu(x), r); };
  EXPECT_LT(gradient_error(x, dx.values(), loss), kTol);
}

TEST(Gradients, SmoothedCrossEntropy) {
  auto z = random_tensor({3, 4}, 50);
  const std::vector<int> y{1, 3, 0};
  const auto g = cross_entropy_smoothed(z, y, 0.1).dlogits;
  auto loss = [&] { return cross_entropy_smoothed(z, y, 0.1).loss; };
  EXPECT_LT(gradient_error(z, g.values(), loss), kTol);
}

TEST(Ops, FloatAndDoubleAgree) {
  const auto x = random_tensor({3, 8}, 60);
  const auto w = random_tensor({8, 4}, 61);
  const auto b = random_tensor({4}, 62);
  const auto yd = gelu(linear(x, w, b));
  const auto yf = gelu(linear(x.cast<float>(), w.cast<float>(), b.cast<float>()));
  for (std::size_t i = 0; i < yd.size(); ++i) EXPECT_NEAR(yf[i], yd[i], 1e-5);
}

}  // namespace
}  // namespace kwt
