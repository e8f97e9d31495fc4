// Copyright 2026 The melbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "melbridge/nn/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "melbridge/errors.h"
#include "melbridge/mel.h"
#include "melbridge/nn/layers.h"
#include "melbridge/normalizer.h"
#include "melbridge/random.h"

namespace melbridge::nn {

namespace {

// Per-purpose RNG stream tags.
enum StreamTag : std::uint64_t {
  kInitStream = 11,
  kSplitStream,
  kValidationConfigStream,
  kPoolStream,
  kChoiceStream,
  kCropStream,
  kShuffleStream,
};

std::vector<float> ToFloat(const RowMatrix& m) {
  std::vector<float> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) out[i] = static_cast<float>(m.data()[i]);
  return out;
}

MelSpectrogram BaseMel(const Waveform& w, const MelConfig& cfg) {
  const Waveform at_rate = w.sample_rate == cfg.sample_rate ? w : Resample(w, cfg.sample_rate);
  MelSpectrogram m = ToBase(ExtractMel(at_rate, cfg));
  if (!(m.space == kBaseValueSpace)) {
    throw std::logic_error("trainer: mel is not in the normalizing base");
  }
  return m;
}

struct Batch {
  Tensor<float> input, target, mask, features;
};

// Stacks `segment` frames of each example starting at offsets[i]; rows past
// an example's end hold the silence floor and are masked.
Batch Stack(const std::vector<const Example*>& examples, const std::vector<int>& offsets,
            int segment, int n_mels) {
  const int n = static_cast<int>(examples.size());
  const float floor_value = static_cast<float>(std::log(kAmplitudeFloor));
  Batch b{Tensor<float>({n, 1, segment, n_mels}, floor_value),
          Tensor<float>({n, 1, segment, n_mels}, floor_value),
          Tensor<float>({n, 1, segment, n_mels}, 0.0f), Tensor<float>({n, kConfigFeatureDim})};
  for (int s = 0; s < n; ++s) {
    const Example& e = *examples[s];
    const int rows = std::min(segment, e.frames - offsets[s]);
    const std::size_t dst = static_cast<std::size_t>(s) * segment * n_mels;
    const std::size_t src = static_cast<std::size_t>(offsets[s]) * n_mels;
    const std::size_t count = static_cast<std::size_t>(rows) * n_mels;
    std::copy_n(e.input.begin() + src, count, b.input.data.begin() + dst);
    std::copy_n(e.target.begin() + src, count, b.target.data.begin() + dst);
    std::fill_n(b.mask.data.begin() + dst, count, 1.0f);
    for (int k = 0; k < kConfigFeatureDim; ++k) {
      b.features.data[static_cast<std::size_t>(s) * kConfigFeatureDim + k] =
          static_cast<float>(e.features[k]);
    }
  }
  return b;
}

double ValidationLoss(const UNetWeights<float>& weights, const std::vector<Example>& val) {
  double total = 0.0;
  for (const Example& e : val) {
    const Batch b = Stack({&e}, {0}, e.frames, weights.spec.n_mels);
    Tape<float> tape;
    const int in = tape.Constant(b.input);
    const int feat = tape.Constant(b.features);
    const int out = UNetForward(tape, in, feat, weights, Mode::kEval);
    total += tape.value(L1Loss(tape, out, b.target, &b.mask)).data[0];
  }
  return total / static_cast<double>(val.size());
}

}  // namespace

void ValidateTrainingConfig(const TrainingConfig& t) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidInput(std::string("training config: ") + what);
  };
  require(t.epochs > 0, "epochs must be positive");
  require(t.batch_size > 0, "batch_size must be positive");
  require(t.segment_frames > 0, "segment_frames must be positive");
  require(t.learning_rate > 0 && std::isfinite(t.learning_rate),
          "learning_rate must be positive");
  require(t.halving_period > 0, "halving_period must be positive");
  require(t.validation_fraction > 0 && t.validation_fraction < 1,
          "validation_fraction must be in (0, 1)");
  require(t.configs_per_epoch > 0, "configs_per_epoch must be positive");
  require(t.optimizer.beta1 >= 0 && t.optimizer.beta1 < 1 && t.optimizer.beta2 >= 0 &&
              t.optimizer.beta2 < 1 && t.optimizer.epsilon > 0 &&
              t.optimizer.weight_decay >= 0,
          "optimizer settings out of range");
  ValidateSpec(t.model);
}

Example MakeExample(const PreparedItem& item, const MelConfig& cfg_tgt) {
  const MelSpectrogram in = BaseMel(item.intermediate, cfg_tgt);
  const MelSpectrogram gt = BaseMel(item.original, cfg_tgt);
  Example e;
  e.frames = std::min(in.frames(), gt.frames());
  if (e.frames == 0) throw InvalidInput("trainer: item " + item.id + " yields no frames");
  e.input = ToFloat(in.values.topRows(e.frames));
  e.target = ToFloat(gt.values.topRows(e.frames));
  e.features = EncodeConfigFeatures(SplitConfig(cfg_tgt).non_normalizable);
  return e;
}

TrainingResult Train(const PreparedSet& set, const TrainingConfig& tcfg,
                     const std::function<void(const EpochRecord&)>& on_epoch) {
  ValidateTrainingConfig(tcfg);
  const std::size_t n = set.items.size();
  if (n < 2) throw InvalidInput("train: need at least two items for a validation split");
  const std::uint64_t seed = tcfg.seed;
  const std::vector<MelConfig> excluded = BuiltinConfigs();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng(DeriveSeed(seed, kSplitStream));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[UniformIndex(split_rng, i)]);
  const std::size_t n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(tcfg.validation_fraction * n)), 1, n - 1);
  const std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
  std::vector<std::size_t> train_idx(order.begin() + n_val, order.end());

  std::mt19937_64 val_cfg_rng(DeriveSeed(seed, kValidationConfigStream));
  std::vector<Example> val;
  for (std::size_t i : val_idx) {
    val.push_back(MakeExample(set.items[i], SampleRandomConfig(val_cfg_rng, excluded)));
  }

  UNetWeights<float> weights = InitUNetWeights<float>(tcfg.model, DeriveSeed(seed, kInitStream));
  AdamW<float> optimizer(tcfg.optimizer);
  std::mt19937_64 pool_rng(DeriveSeed(seed, kPoolStream));
  std::mt19937_64 choice_rng(DeriveSeed(seed, kChoiceStream));
  std::mt19937_64 crop_rng(DeriveSeed(seed, kCropStream));
  std::mt19937_64 shuffle_rng(DeriveSeed(seed, kShuffleStream));

  TrainingResult result;
  double best_val = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    const double lr =
        StepDecayLearningRate(epoch, tcfg.learning_rate, tcfg.halving_period);
    std::vector<MelConfig> pool;
    for (int k = 0; k < tcfg.configs_per_epoch; ++k) {
      pool.push_back(SampleRandomConfig(pool_rng, excluded));
    }
    for (std::size_t i = train_idx.size(); i > 1; --i) {
      std::swap(train_idx[i - 1], train_idx[UniformIndex(shuffle_rng, i)]);
    }
    EpochRecord record;
    record.epoch = epoch + 1;
    record.learning_rate = lr;
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(tcfg.batch_size)) {
      const std::size_t end =
          std::min(train_idx.size(), start + static_cast<std::size_t>(tcfg.batch_size));
      std::vector<Example> examples;
      std::vector<int> offsets;
      for (std::size_t k = start; k < end; ++k) {
        const MelConfig& cfg = pool[UniformIndex(choice_rng, pool.size())];
        examples.push_back(MakeExample(set.items[train_idx[k]], cfg));
        const int slack = examples.back().frames - tcfg.segment_frames;
        offsets.push_back(slack > 0 ? static_cast<int>(UniformIndex(
                                          crop_rng, static_cast<std::size_t>(slack) + 1))
                                    : 0);
      }
      std::vector<const Example*> ptrs;
      for (const Example& e : examples) ptrs.push_back(&e);
      const Batch b = Stack(ptrs, offsets, tcfg.segment_frames, tcfg.model.n_mels);

      Tape<float> tape;
      const int in = tape.Constant(b.input);
      const int feat = tape.Constant(b.features);
      ParameterMap<float> running;
      const int out = UNetForward(tape, in, feat, weights, Mode::kTrain, &running);
      const int loss = L1Loss(tape, out, b.target, &b.mask);
      const double loss_value = tape.value(loss).data[0];
      if (!std::isfinite(loss_value)) {
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch + 1) + ", batch " +
                                 std::to_string(batches + 1));
      }
      tape.Backward(loss);
      ParameterMap<float> grads = tape.ParameterGradients();
      if (!optimizer.Step(weights.tensors, grads, lr)) {
        ++record.skipped_steps;
      } else {
        for (auto& [name, t] : running) weights.tensors.at(name) = std::move(t);
      }
      loss_sum += loss_value;
      ++batches;
    }
    record.train_loss = loss_sum / batches;
    record.val_loss = ValidationLoss(weights, val);
    if (!std::isfinite(record.val_loss)) {
      throw std::runtime_error("training diverged: non-finite validation loss at epoch " +
                               std::to_string(epoch + 1));
    }
    if (record.val_loss < best_val) {
      best_val = record.val_loss;
      result.best = weights;
      result.best_epoch = epoch + 1;
    }
    result.log.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  return result;
}

}  // namespace melbridge::nn
