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

#include "kwt/train.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "kwt/error.h"
#include "test_support.h"

namespace kwt {
namespace {

using testing::random_tensor;

Tensor<double> row(std::initializer_list<double> v) {
  return Tensor<double>::matrix(1, v.size(), v);
}

double ce(const std::vector<double>& z, int y) {
  double norm = 0.0;
  for (double v : z) norm += std::exp(v);
  return -(z[static_cast<std::size_t>(y)] - std::log(norm));
}

TEST(DistillationLoss, EqualHeadsAndLabelsReduceToPlainCe) {
  const auto z = row({0.3, -1.2, 2.0});
  const std::vector<int> y{1};
  const auto d = distillation_loss<double>(z, z, y, y, 0.0);
  EXPECT_NEAR(d.loss, ce({0.3, -1.2, 2.0}, 1), 1e-14);
}

TEST(DistillationLoss, WrongTeacherLeavesPositiveLoss) {
  const auto z = row({30.0, 0.0, 0.0});
  const std::vector<int> y{0}, yt{2};
  const auto d = distillation_loss<double>(z, z, y, yt, 0.0);
  EXPECT_NEAR(d.loss, 0.5 * ce({30.0, 0.0, 0.0}, 2), 1e-9);
  EXPECT_GT(d.loss, 10.0);
}

TEST(DistillationLoss, HandEvaluatedWithSmoothing) {
  const std::vector<double> zc{1.0, 2.0, 0.5}, zd{-0.5, 0.0, 1.5};
  const std::vector<int> y{1}, yt{2};
  const double s = 0.1;
  double smoothed = 0.0;
  for (int c = 0; c < 3; ++c) smoothed += ((c == 1 ? 1.0 - s : 0.0) + s / 3.0) * ce(zc, c);
  const double expected = 0.5 * smoothed + 0.5 * ce(zd, 2);
  const auto d = distillation_loss<double>(row({1.0, 2.0, 0.5}), row({-0.5, 0.0, 1.5}), y, yt, s);
  EXPECT_NEAR(d.loss, expected, 1e-14);
}

TEST(DistillationLoss, GradientsMatchFiniteDifferences) {
  auto zc = random_tensor({2, 4}, 1), zd = random_tensor({2, 4}, 2);
  const std::vector<int> y{0, 3}, yt{1, 3};
  const auto d = distillation_loss<double>(zc, zd, y, yt, 0.1);
  auto loss = [&] { return distillation_loss<double>(zc, zd, y, yt, 0.1).loss; };
  EXPECT_LT(testing::gradient_error(zc, d.dclass.values(), loss), 1e-6);
  EXPECT_LT(testing::gradient_error(zd, d.ddistill.values(), loss), 1e-6);
}

TEST(DistillationLoss, MissingDistillLogitsIsConfigError) {
  const std::vector<int> y{0};
  EXPECT_THROW(distillation_loss<double>(row({1, 2}), std::nullopt, y, y, 0.1), ConfigError);
}

TEST(Predict, ArgmaxAndTies) {
  ForwardResult<double> r;
  r.logits = Tensor<double>::from({0.1, 0.7, 0.3});
  EXPECT_EQ(predict(r), 1);
  r.logits = Tensor<double>::from({0.5, 0.5, 0.5});
  EXPECT_EQ(predict(r), 0);
  r.logits = Tensor<double>::from({1.0, 3.0, 3.0});
  EXPECT_EQ(predict(r), 1);
}

TEST(Predict, AveragingSoftmaxesCanDisagreeWithEitherToken) {
  ForwardResult<double> r;
  r.logits = Tensor<double>::from({std::log(0.5), std::log(0.1), std::log(0.4)});
  r.distill_logits = Tensor<double>::from({std::log(0.1), std::log(0.5), std::log(0.4)});
  EXPECT_EQ(predict(ForwardResult<double>{r.logits, std::nullopt, {}}), 0);
  EXPECT_EQ(predict(ForwardResult<double>{*r.distill_logits, std::nullopt, {}}), 1);
  EXPECT_EQ(predict(r), 2);
  r.distill_logits = Tensor<double>::from({2.0, 0.0, 1.0});
  EXPECT_EQ(predict(r), 0);
}

KWTConfig small_config(int classes, bool distill = false) {
  KWTConfig c = KWTConfig::micro();
  c.num_classes = classes;
  c.distill_token = distill;
  return c;
}

std::vector<Tensor<float>> features(const Dataset& data, Split split, std::vector<int>* labels) {
  const MfccExtractor fe;
  std::vector<Tensor<float>> out;
  for (const auto* e : data.split(split)) {
    out.push_back(fe.compute(e->waveform).values);
    labels->push_back(e->label);
  }
  return out;
}

TEST(Evaluate, ConstantHeadScoresOneOverC) {
  const Dataset data = make_synthetic_dataset(4, 10, 3);
  auto m = KWTModel<float>::init(small_config(4), 4);
  m.params.head.weight.fill(0.0f);
  m.params.head.bias.fill(0.0f);
  std::vector<Tensor<float>> inputs;
  std::vector<int> labels;
  const MfccExtractor fe;
  for (const auto& e : data.examples) {
    inputs.push_back(fe.compute(e.waveform).values);
    labels.push_back(e.label);
  }
  EXPECT_DOUBLE_EQ(evaluate<float>(m, inputs, labels).accuracy, 0.25);
  EXPECT_THROW(evaluate<float>(m, std::span<const Tensor<float>>{}, {}), InputError);
}

TEST(Evaluate, SelfConsistentLabelsScoreOne) {
  const auto m = KWTModel<float>::init(small_config(3), 5);
  std::vector<Tensor<float>> inputs;
  std::vector<int> labels;
  for (std::uint64_t s = 0; s < 6; ++s) {
    inputs.push_back(random_tensor({98, 40}, s).cast<float>());
    labels.push_back(predict(m, inputs.back()));
  }
  const auto r = evaluate<float>(m, inputs, labels, 2);
  EXPECT_EQ(r.correct, 6u);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
}

Batch fixed_batch(std::size_t n, int classes) {
  const Dataset data = make_synthetic_dataset(classes, 4, 11);
  const MfccExtractor fe;
  Batch b;
  for (std::size_t i = 0; i < n && i < data.examples.size(); ++i) {
    const auto& e = data.examples[i * data.examples.size() / n];
    b.ids.push_back(e.id);
    b.inputs.push_back(fe.compute(e.waveform).values);
    b.labels.push_back(e.label);
  }
  return b;
}

TEST(TrainStep, ZeroLearningRateKeepsParameters) {
  auto m = KWTModel<float>::init(small_config(4), 6);
  const auto before = m.params.pos_embed;
  const auto embed = m.params.embed.weight;
  auto opt = make_adamw_state<float>(m.params.tensors(), {});
  const Batch b = fixed_batch(4, 4);
  const auto metrics = train_step<float>(m, b, nullptr, opt, {100, 10, 1e-3}, 0, 0.1);
  EXPECT_EQ(metrics.lr, 0.0);
  EXPECT_TRUE(std::isfinite(metrics.loss));
  EXPECT_GT(metrics.loss, 0.0);
  EXPECT_EQ(m.params.pos_embed, before);
  EXPECT_EQ(m.params.embed.weight, embed);
}

TEST(TrainStep, FixedBatchLossNeverIncreasesOver50Steps) {
  auto m = KWTModel<float>::init(small_config(4), 7);
  auto opt = make_adamw_state<float>(m.params.tensors(), {});
  const Batch b = fixed_batch(8, 4);
  const ScheduleConfig sched{1000, 0, 3e-4};
  double prev = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 50; ++s) {
    const double loss = train_step<float>(m, b, nullptr, opt, sched, s, 0.1).loss;
    EXPECT_LE(loss, prev) << "step " << s;
    prev = loss;
  }
}

TEST(TrainStep, ThreadCountDoesNotChangeTheLossMuch) {
  auto a = KWTModel<float>::init(small_config(4), 8);
  auto b = a;
  auto oa = make_adamw_state<float>(a.params.tensors(), {});
  auto ob = make_adamw_state<float>(b.params.tensors(), {});
  const Batch batch = fixed_batch(6, 4);
  const ScheduleConfig sched{100, 0, 1e-3};
  const auto ma = train_step<float>(a, batch, nullptr, oa, sched, 1, 0.1, 1);
  const auto mb = train_step<float>(b, batch, nullptr, ob, sched, 1, 0.1, 3);
  EXPECT_NEAR(ma.loss, mb.loss, 1e-6);
  for (std::size_t i = 0; i < a.params.pos_embed.size(); ++i)
    EXPECT_NEAR(a.params.pos_embed[i], b.params.pos_embed[i], 1e-6);
}

TEST(TrainStep, NonFiniteLossAbortsBeforeUpdate) {
  auto m = KWTModel<float>::init(small_config(4), 9);
  m.params.head.bias[0] = std::numeric_limits<float>::quiet_NaN();
  const auto embed = m.params.embed.weight;
  auto opt = make_adamw_state<float>(m.params.tensors(), {});
  EXPECT_THROW(train_step<float>(m, fixed_batch(2, 4), nullptr, opt, {10, 0, 1e-3}, 1, 0.1),
               NumericError);
  EXPECT_EQ(m.params.embed.weight, embed);
}

class RecordingTeacher : public Teacher {
 public:
  std::vector<int> labels(std::span<const std::string> ids,
                          std::span<const Tensor<float>> inputs) override {
    hashes.push_back(batch_hash(inputs));
    return std::vector<int>(ids.size(), 0);
  }
  std::string name() const override { return "recording"; }
  std::vector<std::uint64_t> hashes;
};

TEST(Trainer, TeacherSeesTheStudentsAugmentedInputs) {
  const Dataset data = make_synthetic_dataset(4, 10, 12);
  auto m = KWTModel<float>::init(small_config(4, true), 13);
  TrainConfig cfg;
  cfg.steps = 3;
  cfg.batch_size = 4;
  cfg.eval_every = 100;
  RecordingTeacher teacher;
  Trainer trainer(m, data, cfg, AugmentPolicy{}, &teacher);
  const auto summary = trainer.run();
  ASSERT_EQ(teacher.hashes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(teacher.hashes[i], summary.history[i].input_hash);
  EXPECT_NE(summary.history[0].input_hash, summary.history[1].input_hash);
}

TEST(Trainer, TeacherAndDistillTokenMustAgree) {
  const Dataset data = make_synthetic_dataset(4, 5, 14);
  TrainConfig cfg;
  cfg.steps = 1;
  cfg.batch_size = 2;
  RecordingTeacher teacher;
  auto plain = KWTModel<float>::init(small_config(4), 15);
  Trainer with_teacher(plain, data, cfg, AugmentPolicy::none(), &teacher);
  EXPECT_THROW(with_teacher.step(0), ConfigError);
  auto distill = KWTModel<float>::init(small_config(4, true), 16);
  Trainer without(distill, data, cfg, AugmentPolicy::none());
  EXPECT_THROW(without.step(0), ConfigError);
}

TEST(Trainer, SeededRunsAreBitIdentical) {
  const Dataset data = make_synthetic_dataset(4, 10, 17);
  TrainConfig cfg;
  cfg.steps = 4;
  cfg.batch_size = 4;
  cfg.eval_every = 2;
  cfg.seed = 99;
  auto run = [&] {
    auto m = KWTModel<float>::init(small_config(4), 18);
    Trainer t(m, data, cfg, AugmentPolicy{});
    return std::pair{t.run(), m};
  };
  const auto [a, ma] = run();
  const auto [b, mb] = run();
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].loss, b.history[i].loss);
    EXPECT_EQ(a.history[i].input_hash, b.history[i].input_hash);
  }
  ASSERT_EQ(a.evals.size(), 2u);
  EXPECT_EQ(a.evals[1].train_acc, b.evals[1].train_acc);
  EXPECT_EQ(ma.params.pos_embed, mb.params.pos_embed);
}

TEST(Trainer, WarmupEpochsConvertToSteps) {
  const Dataset data = make_synthetic_dataset(4, 10, 19);
  const std::size_t n_train = data.split(Split::kTrain).size();
  TrainConfig cfg;
  cfg.steps = 1000;
  cfg.batch_size = 8;
  cfg.warmup_epochs = 2.5;
  auto m = KWTModel<float>::init(small_config(4), 20);
  Trainer t(m, data, cfg, AugmentPolicy::none());
  const auto per_epoch = static_cast<double>((n_train + 7) / 8);
  EXPECT_EQ(t.schedule().warmup_steps, std::llround(2.5 * per_epoch));
  EXPECT_EQ(cosine_warmup_lr(t.schedule().warmup_steps, t.schedule()), 1e-3);
}

TEST(Trainer, EpochCoversEveryTrainingExampleOnce) {
  const Dataset data = make_synthetic_dataset(4, 10, 21);
  const auto train = data.split(Split::kTrain);
  TrainConfig cfg;
  cfg.steps = 100;
  cfg.batch_size = 1;
  auto m = KWTModel<float>::init(small_config(4), 22);
  Trainer t(m, data, cfg, AugmentPolicy::none());
  std::multiset<std::string> seen;
  for (std::size_t s = 0; s < train.size(); ++s) seen.insert(t.make_batch(static_cast<std::int64_t>(s)).ids[0]);
  for (const auto* e : train) EXPECT_EQ(seen.count(e->id), 1u) << e->id;
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.label_smoothing = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(TrainConfig::desk_scale().batch_size, 64);
  EXPECT_EQ(TrainConfig::desk_scale().steps, 2000);
}

}  // namespace
}  // namespace kwt
