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
#include <span>
#include <string>
#include <vector>

#include "kwt/augment.h"
#include "kwt/data.h"
#include "kwt/frontend.h"
#include "kwt/model.h"
#include "kwt/optim.h"
#include "kwt/teacher.h"

namespace kwt {

struct TrainConfig {
  std::int64_t steps = 23000;
  int batch_size = 512;
  double lr = 1e-3;
  double weight_decay = 0.1;
  double label_smoothing = 0.1;
  double warmup_epochs = 10.0;
  std::uint64_t seed = 0;
  std::int64_t eval_every = 1000;
  // Workers for feature extraction and per-example forward/backward. The
  // gradient reduction order depends only on this count.
  int threads = 1;
  bool augment = true;
  // Stop at the first evaluation whose train accuracy reaches this value;
  // 0 disables early stopping.
  double target_train_accuracy = 0.0;

  // Batch 64, 2000 steps.
  static TrainConfig desk_scale();
  void validate() const;
};

template <Real T>
struct DistillLoss {
  T loss = T(0);
  Tensor<T> dclass;    // d(loss)/d(Z_sc)
  Tensor<T> ddistill;  // d(loss)/d(Z_sd)
};

// ½·CE(Z_sc, y) with label smoothing + ½·CE(Z_sd, y_t) against the
// teacher's hard labels, both batch means over [B, C] logits.
template <Real T>
DistillLoss<T> distillation_loss(const Tensor<T>& class_logits,
                                 const std::optional<Tensor<T>>& distill_logits,
                                 std::span<const int> labels,
                                 std::span<const int> teacher_labels,
                                 T smoothing);

struct Batch {
  std::vector<std::string> ids;
  std::vector<Tensor<float>> inputs;  // augmented [T, F] spectrograms
  std::vector<int> labels;
};

// FNV-1a over the raw bytes of every input, in order.
std::uint64_t batch_hash(std::span<const Tensor<float>> inputs);

struct StepMetrics {
  std::int64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  double accuracy = 0.0;
  std::uint64_t input_hash = 0;
};

// One forward/backward/AdamW update at lr = cosine_warmup_lr(step). The
// teacher, required exactly when the model carries a distillation token,
// labels the same augmented inputs. Throws NumericError on a non-finite
// loss before touching the parameters.
template <Real T>
StepMetrics train_step(KWTModel<T>& model, const Batch& batch, Teacher* teacher,
                       AdamWState<T>& optimizer, const ScheduleConfig& schedule,
                       std::int64_t step, double label_smoothing,
                       int threads = 1);

// Class id from one forward result: argmax of the class logits, or of the
// mean of the class and distillation softmaxes. Ties go to the lower id.
template <Real T>
int predict(const ForwardResult<T>& result);

template <Real T>
int predict(const KWTModel<T>& model, const Tensor<float>& spec);

struct EvalResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t count = 0;
};

// Augmentation-free accuracy. Throws InputError on an empty set.
template <Real T>
EvalResult evaluate(const KWTModel<T>& model,
                    std::span<const Tensor<float>> inputs,
                    std::span<const int> labels, int threads = 1);

EvalResult evaluate(const KWTModel<float>& model,
                    std::span<const LabeledExample* const> examples,
                    const MfccExtractor& frontend, int threads = 1);

struct EvalRecord {
  std::int64_t step = 0;
  double loss = 0.0;  // mean step loss since the previous record
  double lr = 0.0;
  double train_acc = 0.0;
  std::optional<double> val_acc;
};

struct TrainSummary {
  std::int64_t steps_run = 0;
  std::int64_t warmup_steps = 0;
  std::vector<StepMetrics> history;
  std::vector<EvalRecord> evals;
};

// Drives the training recipe over a dataset: epoch shuffling, per-example
// augmentation (seeded by step and batch slot), optional teacher, periodic
// evaluation on the training and validation splits.
class Trainer {
 public:
  Trainer(KWTModel<float>& model, const Dataset& data, TrainConfig config,
          AugmentPolicy policy, Teacher* teacher = nullptr,
          FrontendConfig frontend = {});

  TrainSummary run(const std::function<void(const EvalRecord&)>& on_eval = {});

  Batch make_batch(std::int64_t step);
  StepMetrics step(std::int64_t step);
  EvalRecord evaluate_now(std::int64_t step, double mean_loss, double lr);

  const ScheduleConfig& schedule() const { return schedule_; }
  const AdamWState<float>& optimizer() const { return optimizer_; }

 private:
  const Tensor<float>& clean_features(const LabeledExample* e);
  std::size_t next_index();

  KWTModel<float>& model_;
  const Dataset& data_;
  TrainConfig config_;
  AugmentPolicy policy_;
  Teacher* teacher_;
  MfccExtractor frontend_;
  ScheduleConfig schedule_;
  AdamWState<float> optimizer_;
  std::vector<const LabeledExample*> train_;
  std::vector<const LabeledExample*> val_;
  std::vector<std::optional<Tensor<float>>> train_features_;
  std::vector<Tensor<float>> val_features_;
  std::vector<int> val_labels_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::uint64_t epoch_ = 0;
};

}  // namespace kwt
