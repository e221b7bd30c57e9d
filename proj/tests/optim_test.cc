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

#include "kwt/optim.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kwt/error.h"
#include "kwt/random.h"

namespace kwt {
namespace {

TEST(AdamW, TwoStepsMatchManualRecurrence) {
  Tensor<double> p = Tensor<double>::from({0.5, -1.0, 2.0});
  std::vector<Tensor<double>*> params{&p};
  AdamWConfig cfg{0.9, 0.999, 1e-8, 0.1};
  auto state = make_adamw_state<double>(params, cfg);
  const std::vector<std::vector<double>> grads{{0.1, -0.2, 0.3}, {-0.05, 0.4, 0.0}};
  const double lr = 0.01;

  std::vector<double> w{0.5, -1.0, 2.0}, m(3, 0.0), v(3, 0.0);
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    p.set_grad(grads[t - 1]);
    adamw_step<double>(params, state, lr);
    for (std::size_t j = 0; j < 3; ++j) {
      const double g = grads[t - 1][j];
      w[j] -= lr * 0.1 * w[j];
      m[j] = 0.9 * m[j] + 0.1 * g;
      v[j] = 0.999 * v[j] + 0.001 * g * g;
      const double mh = m[j] / (1 - std::pow(0.9, static_cast<double>(t)));
      const double vh = v[j] / (1 - std::pow(0.999, static_cast<double>(t)));
      w[j] -= lr * mh / (std::sqrt(vh) + 1e-8);
    }
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(p[j], w[j], 1e-14) << "t=" << t;
  }
  EXPECT_EQ(state.step, 2u);
}

TEST(AdamW, ZeroLearningRateLeavesParametersUnchanged) {
  Tensor<float> p = Tensor<float>::from({1.0f, 2.0f});
  std::vector<Tensor<float>*> params{&p};
  auto state = make_adamw_state<float>(params, {});
  p.set_grad({3.0f, -4.0f});
  adamw_step<float>(params, state, 0.0);
  EXPECT_EQ(p, Tensor<float>::from({1.0f, 2.0f}));
}

TEST(AdamW, FirstStepMovesEachCoordinateByAboutLr) {
  Tensor<double> p({5}, 0.0);
  std::vector<Tensor<double>*> params{&p};
  auto state = make_adamw_state<double>(params, {});
  p.set_grad({1e-3, -2.0, 5.0, -7e-2, 1.0});
  adamw_step<double>(params, state, 1e-3);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(std::abs(p[j]), 1e-3, 1e-8);
}

TEST(AdamW, RejectsMissingGradAndNegativeLr) {
  Tensor<double> p({2});
  std::vector<Tensor<double>*> params{&p};
  auto state = make_adamw_state<double>(params, {});
  EXPECT_THROW(adamw_step<double>(params, state, 1e-3), ConfigError);
  p.set_grad({0.0, 0.0});
  EXPECT_THROW(adamw_step<double>(params, state, -1.0), ConfigError);
  Tensor<double> q({2});
  std::vector<Tensor<double>*> two{&p, &q};
  EXPECT_THROW(adamw_step<double>(two, state, 1e-3), ConfigError);
}

TEST(Schedule, WarmupMidpointAndEnd) {
  const ScheduleConfig cfg{1000, 100, 1e-3};
  EXPECT_EQ(cosine_warmup_lr(0, cfg), 0.0);
  EXPECT_NEAR(cosine_warmup_lr(50, cfg), 0.5e-3, 1e-15);
  EXPECT_NEAR(cosine_warmup_lr(100, cfg), 1e-3, 1e-15);
  EXPECT_NEAR(cosine_warmup_lr(550, cfg), 0.5e-3, 1e-15);
  EXPECT_EQ(cosine_warmup_lr(1000, cfg), 0.0);
  EXPECT_EQ(cosine_warmup_lr(5000, cfg), 0.0);
}

TEST(Schedule, MonotoneAfterWarmupAndBounded) {
  const ScheduleConfig cfg{500, 37, 3e-3};
  double prev = cosine_warmup_lr(cfg.warmup_steps, cfg);
  for (std::int64_t s = 0; s < cfg.total_steps; ++s) {
    const double lr = cosine_warmup_lr(s, cfg);
    EXPECT_GE(lr, 0.0);
    EXPECT_LE(lr, cfg.lr_peak);
    if (s > cfg.warmup_steps) {
      EXPECT_LE(lr, prev);
      prev = lr;
    }
  }
}

TEST(Schedule, RejectsInvalidConfigs) {
  EXPECT_THROW(cosine_warmup_lr(0, {0, 0, 1e-3}), ConfigError);
  EXPECT_THROW(cosine_warmup_lr(0, {10, 10, 1e-3}), ConfigError);
  EXPECT_THROW(cosine_warmup_lr(0, {10, -1, 1e-3}), ConfigError);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformIntCoversInclusiveRange) {
  Rng rng(7);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto v = rng.uniform_int(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
    ++hits[static_cast<std::size_t>(v + 2)];
  }
  for (int h : hits) EXPECT_GT(h, 850);
  EXPECT_EQ(rng.uniform_int(3, 3), 3);
}

TEST(Rng, NormalMomentsAndTruncation) {
  Rng rng(9);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
  for (int i = 0; i < 10000; ++i) EXPECT_LE(std::abs(rng.truncated_normal(0.02)), 0.04);
}

TEST(Rng, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
  EXPECT_EQ(derive_seed(5, 6, 7), derive_seed(5, 6, 7));
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
}  // namespace kwt
