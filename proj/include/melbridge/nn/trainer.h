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

#ifndef MELBRIDGE_NN_TRAINER_H_
#define MELBRIDGE_NN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "melbridge/nn/dataset.h"
#include "melbridge/nn/optim.h"
#include "melbridge/nn/unet.h"

namespace melbridge::nn {

struct TrainingConfig {
  int epochs = 100;
  int batch_size = 32;
  int segment_frames = 200;
  double learning_rate = 1e-3;
  int halving_period = 50;
  AdamWOptions optimizer;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  // Size of the random target-config pool drawn every epoch.
  int configs_per_epoch = 100;
  UNetSpec model;
};

void ValidateTrainingConfig(const TrainingConfig& tcfg);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
  int skipped_steps = 0;
};

struct TrainingResult {
  // Weights from the epoch with the lowest validation loss.
  UNetWeights<float> best;
  int best_epoch = 0;
  std::vector<EpochRecord> log;
};

// One training or validation example in the normalizing base, [frames x
// n_mels] row-major, with the conditioning vector of its target config.
struct Example {
  std::vector<float> input;
  std::vector<float> target;
  int frames = 0;
  ConfigFeatureVector features{};
};

// Extracts both mels under cfg_tgt (resampling as needed), moves them to
// the base and trims to the shorter. Throws std::logic_error if either
// mel is not in the base afterwards.
Example MakeExample(const PreparedItem& item, const MelConfig& cfg_tgt);

// Every batch: a target config per item from this epoch's pool, both mels
// extracted under it, a random crop of segment_frames (shorter examples
// are padded with the silence floor and masked out of the loss), forward in
// train mode, masked L1 in the base, backward, AdamW. Validation runs on a
// fixed held-out split with target configs fixed at split time, full
// length, eval mode. A non-finite loss throws std::runtime_error.
TrainingResult Train(const PreparedSet& set, const TrainingConfig& tcfg,
                     const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace melbridge::nn

#endif  // MELBRIDGE_NN_TRAINER_H_
