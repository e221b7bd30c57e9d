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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string_view>

#include "kwt/error.h"
#include "kwt/parallel.h"
#include "kwt/random.h"

namespace kwt {

TrainConfig TrainConfig::desk_scale() {
  TrainConfig c;
  c.steps = 2000;
  c.batch_size = 64;
  c.eval_every = 100;
  return c;
}

void TrainConfig::validate() const {
  if (steps <= 0) throw ConfigError("train: steps must be positive");
  if (batch_size <= 0) throw ConfigError("train: batch_size must be positive");
  if (!(lr > 0)) throw ConfigError("train: lr must be positive");
  if (weight_decay < 0) throw ConfigError("train: weight_decay must be >= 0");
  if (!(label_smoothing >= 0 && label_smoothing < 1)) {
    throw ConfigError("train: label_smoothing must lie in [0, 1)");
  }
  if (warmup_epochs < 0) throw ConfigError("train: warmup_epochs must be >= 0");
  if (eval_every <= 0) throw ConfigError("train: eval_every must be positive");
  if (threads <= 0) throw ConfigError("train: threads must be positive");
  if (!(target_train_accuracy >= 0 && target_train_accuracy <= 1)) {
    throw ConfigError("train: target_train_accuracy must lie in [0, 1]");
  }
}

template <Real T>
DistillLoss<T> distillation_loss(const Tensor<T>& class_logits,
                                 const std::optional<Tensor<T>>& distill_logits,
                                 std::span<const int> labels,
                                 std::span<const int> teacher_labels,
                                 T smoothing) {
  if (!distill_logits) {
    throw ConfigError("distillation loss needs distillation-token logits");
  }
  LossResult<T> cls = cross_entropy_smoothed(class_logits, labels, smoothing);
  LossResult<T> dst = cross_entropy_smoothed(*distill_logits, teacher_labels, T(0));
  DistillLoss<T> out;
  out.loss = T(0.5) * cls.loss + T(0.5) * dst.loss;
  for (T& g : cls.dlogits.values()) g *= T(0.5);
  for (T& g : dst.dlogits.values()) g *= T(0.5);
  out.dclass = std::move(cls.dlogits);
  out.ddistill = std::move(dst.dlogits);
  return out;
}

std::uint64_t batch_hash(std::span<const Tensor<float>> inputs) {
  std::uint64_t h = fnv1a({});
  for (const auto& t : inputs) {
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(t.values().data()),
                               t.size() * sizeof(float)),
              h);
  }
  return h;
}

namespace {

template <Real T>
int argmax(std::span<const T> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return static_cast<int>(best);
}

template <Real T>
Tensor<T> as_input(const Tensor<float>& spec) {
  if constexpr (std::is_same_v<T, float>) {
    return spec;
  } else {
    return spec.template cast<T>();
  }
}

}  // namespace

template <Real T>
int predict(const ForwardResult<T>& result) {
  if (!result.distill_logits) return argmax<T>(result.logits.data());
  const Tensor<T> a = softmax(result.logits, -1);
  const Tensor<T> b = softmax(*result.distill_logits, -1);
  std::vector<T> mean(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) mean[i] = T(0.5) * (a[i] + b[i]);
  return argmax<T>(mean);
}

template <Real T>
int predict(const KWTModel<T>& model, const Tensor<float>& spec) {
  return predict(forward(model, as_input<T>(spec)));
}

template <Real T>
StepMetrics train_step(KWTModel<T>& model, const Batch& batch, Teacher* teacher,
                       AdamWState<T>& optimizer, const ScheduleConfig& schedule,
                       std::int64_t step, double label_smoothing, int threads) {
  const std::size_t n = batch.inputs.size();
  if (n == 0) throw InputError("train_step: empty batch");
  if (batch.labels.size() != n) {
    throw InputError("train_step: batch has " + std::to_string(n) + " inputs but " +
                     std::to_string(batch.labels.size()) + " labels");
  }
  const KWTConfig& cfg = model.config;
  if (cfg.distill_token && teacher == nullptr) {
    throw ConfigError("train_step: a distillation token requires a teacher");
  }
  if (!cfg.distill_token && teacher != nullptr) {
    throw ConfigError("train_step: teacher given but the model has no distillation token");
  }
  std::vector<int> teacher_labels;
  if (teacher) {
    teacher_labels = teacher->labels(batch.ids, batch.inputs);
    if (teacher_labels.size() != n) {
      throw InputError("train_step: teacher returned the wrong number of labels");
    }
  }

  const double lr = cosine_warmup_lr(step, schedule);
  const T smoothing = static_cast<T>(label_smoothing);
  const T inv_n = T(1) / static_cast<T>(n);
  const int workers = std::clamp(threads, 1, static_cast<int>(n));
  std::vector<KWTParams<T>> grads;
  for (int w = 0; w < workers; ++w) {
    grads.push_back(KWTParams<T>::zeros(cfg));
    grads.back().set_zero();
  }
  std::vector<T> losses(n);
  std::vector<char> correct(n);

  parallel_for(n, workers, [&](std::size_t begin, std::size_t end, int w) {
    const Shape row_shape{1, static_cast<std::size_t>(cfg.num_classes)};
    const Shape flat_shape{static_cast<std::size_t>(cfg.num_classes)};
    for (std::size_t i = begin; i < end; ++i) {
      ForwardCache<T> cache;
      ForwardResult<T> r = forward(model, as_input<T>(batch.inputs[i]), false, &cache);
      correct[i] = predict(r) == batch.labels[i];
      const int label = batch.labels[i];
      Tensor<T> z = r.logits;
      z.reshape(row_shape);
      if (cfg.distill_token) {
        Tensor<T> zd = *r.distill_logits;
        zd.reshape(row_shape);
        const int tl = teacher_labels[i];
        DistillLoss<T> dl = distillation_loss<T>(z, std::optional<Tensor<T>>(std::move(zd)),
                                                 std::span<const int>(&label, 1),
                                                 std::span<const int>(&tl, 1), smoothing);
        losses[i] = dl.loss;
        for (T& g : dl.dclass.values()) g *= inv_n;
        for (T& g : dl.ddistill.values()) g *= inv_n;
        dl.dclass.reshape(flat_shape);
        dl.ddistill.reshape(flat_shape);
        backward(model, cache, dl.dclass, &dl.ddistill, grads[static_cast<std::size_t>(w)]);
      } else {
        LossResult<T> ce =
            cross_entropy_smoothed(z, std::span<const int>(&label, 1), smoothing);
        losses[i] = ce.loss;
        for (T& g : ce.dlogits.values()) g *= inv_n;
        ce.dlogits.reshape(flat_shape);
        backward<T>(model, cache, ce.dlogits, nullptr, grads[static_cast<std::size_t>(w)]);
      }
    }
  });

  double loss = 0.0;
  for (T l : losses) loss += static_cast<double>(l);
  loss /= static_cast<double>(n);
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite loss at step " + std::to_string(step) +
                       " (lr=" + std::to_string(lr) + ")");
  }
  for (std::size_t w = 1; w < grads.size(); ++w) grads[0].accumulate(grads[w]);

  std::vector<Tensor<T>*> params = model.params.tensors();
  std::vector<Tensor<T>*> g = grads[0].tensors();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->set_grad(std::move(g[i]->values()));
  adamw_step<T>(params, optimizer, lr);
  for (Tensor<T>* p : params) p->clear_grad();

  StepMetrics m;
  m.step = step;
  m.loss = loss;
  m.lr = lr;
  m.accuracy = static_cast<double>(std::count(correct.begin(), correct.end(), 1)) /
               static_cast<double>(n);
  m.input_hash = batch_hash(batch.inputs);
  return m;
}

template <Real T>
EvalResult evaluate(const KWTModel<T>& model, std::span<const Tensor<float>> inputs,
                    std::span<const int> labels, int threads) {
  if (inputs.empty()) throw InputError("evaluate: empty split");
  if (inputs.size() != labels.size()) {
    throw InputError("evaluate: inputs and labels differ in length");
  }
  std::vector<char> correct(inputs.size());
  parallel_for(inputs.size(), threads, [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t i = begin; i < end; ++i)
      correct[i] = predict(model, inputs[i]) == labels[i];
  });
  EvalResult r;
  r.count = inputs.size();
  r.correct = static_cast<std::size_t>(std::count(correct.begin(), correct.end(), 1));
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.count);
  return r;
}

EvalResult evaluate(const KWTModel<float>& model,
                    std::span<const LabeledExample* const> examples,
                    const MfccExtractor& frontend, int threads) {
  if (examples.empty()) throw InputError("evaluate: empty split");
  std::vector<Tensor<float>> inputs(examples.size());
  std::vector<int> labels(examples.size());
  parallel_for(examples.size(), threads, [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t i = begin; i < end; ++i) {
      inputs[i] = frontend.compute(example_waveform(*examples[i])).values;
      labels[i] = examples[i]->label;
    }
  });
  return evaluate<float>(model, inputs, labels, threads);
}

// ---------------------------------------------------------------------------

Trainer::Trainer(KWTModel<float>& model, const Dataset& data, TrainConfig config,
                 AugmentPolicy policy, Teacher* teacher, FrontendConfig frontend)
    : model_(model),
      data_(data),
      config_(config),
      policy_(policy),
      teacher_(teacher),
      frontend_(frontend) {
  config_.validate();
  policy_.validate();
  if (model_.config.num_classes != data_.num_classes()) {
    throw ConfigError("model has " + std::to_string(model_.config.num_classes) +
                      " classes but the dataset has " +
                      std::to_string(data_.num_classes()));
  }
  train_ = data_.split(Split::kTrain);
  val_ = data_.split(Split::kValidation);
  if (train_.empty()) throw InputError("training split is empty");

  const auto steps_per_epoch = static_cast<std::int64_t>(
      (train_.size() + static_cast<std::size_t>(config_.batch_size) - 1) /
      static_cast<std::size_t>(config_.batch_size));
  schedule_.total_steps = config_.steps;
  schedule_.lr_peak = config_.lr;
  schedule_.warmup_steps = std::min<std::int64_t>(
      std::llround(config_.warmup_epochs * static_cast<double>(steps_per_epoch)),
      config_.steps - 1);

  const std::vector<Tensor<float>*> params = model_.params.tensors();
  optimizer_ = make_adamw_state<float>(
      params, AdamWConfig{0.9, 0.999, 1e-8, config_.weight_decay});

  train_features_.resize(train_.size());
  parallel_for(train_.size(), config_.threads, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i)
      train_features_[i] = frontend_.compute(example_waveform(*train_[i])).values;
  });
  val_features_.resize(val_.size());
  val_labels_.resize(val_.size());
  parallel_for(val_.size(), config_.threads, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      val_features_[i] = frontend_.compute(example_waveform(*val_[i])).values;
      val_labels_[i] = val_[i]->label;
    }
  });
}

std::size_t Trainer::next_index() {
  if (cursor_ >= order_.size()) {
    order_.resize(train_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Rng rng(derive_seed(config_.seed, 0x5eedULL, epoch_++));
    for (std::size_t i = order_.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order_[i - 1], order_[j]);
    }
    cursor_ = 0;
  }
  return order_[cursor_++];
}

const Tensor<float>& Trainer::clean_features(const LabeledExample* e) {
  const auto it = std::find(train_.begin(), train_.end(), e);
  return *train_features_[static_cast<std::size_t>(it - train_.begin())];
}

Batch Trainer::make_batch(std::int64_t step) {
  const auto n = static_cast<std::size_t>(config_.batch_size);
  std::vector<std::size_t> picks(n);
  for (auto& p : picks) p = next_index();
  Batch batch;
  batch.ids.resize(n);
  batch.labels.resize(n);
  batch.inputs.resize(n);
  parallel_for(n, config_.threads, [&](std::size_t b, std::size_t e, int) {
    for (std::size_t j = b; j < e; ++j) {
      const LabeledExample* ex = train_[picks[j]];
      batch.ids[j] = ex->id;
      batch.labels[j] = ex->label;
      if (!config_.augment) {
        batch.inputs[j] = *train_features_[picks[j]];
        continue;
      }
      Rng rng(derive_seed(config_.seed, static_cast<std::uint64_t>(step) + 1, j));
      const Waveform w = augment_waveform(example_waveform(*ex), data_.background_noise,
                                          policy_, rng);
      batch.inputs[j] = spec_augment(frontend_.compute(w), policy_, rng).values;
    }
  });
  return batch;
}

StepMetrics Trainer::step(std::int64_t step) {
  const Batch batch = make_batch(step);
  return train_step<float>(model_, batch, teacher_, optimizer_, schedule_, step,
                           config_.label_smoothing, config_.threads);
}

EvalRecord Trainer::evaluate_now(std::int64_t step, double mean_loss, double lr) {
  EvalRecord rec;
  rec.step = step;
  rec.loss = mean_loss;
  rec.lr = lr;
  std::vector<Tensor<float>> feats;
  std::vector<int> labels;
  feats.reserve(train_.size());
  for (std::size_t i = 0; i < train_.size(); ++i) {
    feats.push_back(*train_features_[i]);
    labels.push_back(train_[i]->label);
  }
  rec.train_acc = evaluate<float>(model_, feats, labels, config_.threads).accuracy;
  if (!val_.empty()) {
    rec.val_acc = evaluate<float>(model_, val_features_, val_labels_, config_.threads).accuracy;
  }
  return rec;
}

TrainSummary Trainer::run(const std::function<void(const EvalRecord&)>& on_eval) {
  TrainSummary summary;
  summary.warmup_steps = schedule_.warmup_steps;
  double loss_sum = 0.0;
  std::int64_t loss_count = 0;
  for (std::int64_t s = 0; s < config_.steps; ++s) {
    const StepMetrics m = step(s);
    summary.history.push_back(m);
    summary.steps_run = s + 1;
    loss_sum += m.loss;
    ++loss_count;
    if ((s + 1) % config_.eval_every == 0 || s + 1 == config_.steps) {
      const EvalRecord rec =
          evaluate_now(s + 1, loss_sum / static_cast<double>(loss_count), m.lr);
      loss_sum = 0.0;
      loss_count = 0;
      summary.evals.push_back(rec);
      if (on_eval) on_eval(rec);
      if (config_.target_train_accuracy > 0 &&
          rec.train_acc >= config_.target_train_accuracy) {
        break;
      }
    }
  }
  return summary;
}

#define KWT_INSTANTIATE_TRAIN(T)                                                \
  template DistillLoss<T> distillation_loss(const Tensor<T>&,                   \
                                            const std::optional<Tensor<T>>&,    \
                                            std::span<const int>,               \
                                            std::span<const int>, T);           \
  template int predict(const ForwardResult<T>&);                                \
  template int predict(const KWTModel<T>&, const Tensor<float>&);               \
  template StepMetrics train_step(KWTModel<T>&, const Batch&, Teacher*,         \
                                  AdamWState<T>&, const ScheduleConfig&,        \
                                  std::int64_t, double, int);                   \
  template EvalResult evaluate(const KWTModel<T>&, std::span<const Tensor<float>>, \
                               std::span<const int>, int);

KWT_INSTANTIATE_TRAIN(float)
KWT_INSTANTIATE_TRAIN(double)

#undef KWT_INSTANTIATE_TRAIN

}  // namespace kwt
