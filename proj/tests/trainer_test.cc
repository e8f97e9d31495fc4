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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "melbridge/config.h"
#include "melbridge/errors.h"
#include "melbridge/nn/dataset.h"
#include "melbridge/nn/weights_io.h"
#include "melbridge/synthetic.h"

namespace melbridge::nn {
namespace {

class TrainTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto corpus = SyntheticCorpus(8, 2, 0.5);
    std::vector<std::string> ids;
    for (int i = 0; i < 8; ++i) ids.push_back("c" + std::to_string(i));
    PrepareOptions o;
    o.n_subsets = 4;
    o.seed = 3;
    set_ = new PreparedSet(PrepareTrainingSet(corpus, ids, o));
  }
  static void TearDownTestSuite() { delete set_; }

  static TrainingConfig Small() {
    TrainingConfig t;
    t.epochs = 2;
    t.batch_size = 3;
    t.segment_frames = 24;
    t.configs_per_epoch = 4;
    t.validation_fraction = 0.25;
    t.seed = 5;
    t.model = UNetSpec{2, 4, 80, 8};
    return t;
  }
  static PreparedSet* set_;
};

PreparedSet* TrainTest::set_ = nullptr;

TEST_F(TrainTest, TwoEpochsGiveFiniteLog) {
  std::vector<EpochRecord> seen;
  const TrainingResult r = Train(*set_, Small(), [&](const EpochRecord& e) { seen.push_back(e); });
  ASSERT_EQ(r.log.size(), 2u);
  ASSERT_EQ(seen.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(r.log[i].epoch, i + 1);
    EXPECT_TRUE(std::isfinite(r.log[i].train_loss));
    EXPECT_TRUE(std::isfinite(r.log[i].val_loss));
    EXPECT_GT(r.log[i].train_loss, 0.0);
    EXPECT_DOUBLE_EQ(r.log[i].learning_rate, 1e-3);
    EXPECT_EQ(seen[i].val_loss, r.log[i].val_loss);
  }
  EXPECT_GE(r.best_epoch, 1);
  EXPECT_LE(r.best_epoch, 2);
  EXPECT_LE(r.log[r.best_epoch - 1].val_loss, r.log[2 - r.best_epoch].val_loss);
  EXPECT_EQ(r.best.spec, Small().model);
  EXPECT_NO_THROW(ValidateWeights(r.best));
}

TEST_F(TrainTest, SeededRunsAreIdentical) {
  const TrainingResult a = Train(*set_, Small());
  const TrainingResult b = Train(*set_, Small());
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
    EXPECT_EQ(a.log[i].val_loss, b.log[i].val_loss);
  }
  EXPECT_EQ(EncodeWeights(a.best), EncodeWeights(b.best));
  TrainingConfig other = Small();
  other.seed = 6;
  EXPECT_NE(Train(*set_, other).log[0].train_loss, a.log[0].train_loss);
}

TEST_F(TrainTest, SegmentsLongerThanExamplesArePadded) {
  TrainingConfig t = Small();
  t.epochs = 1;
  t.segment_frames = 400;
  const TrainingResult r = Train(*set_, t);
  EXPECT_TRUE(std::isfinite(r.log[0].train_loss));
}

TEST_F(TrainTest, ExamplesLiveInTheBase) {
  const MelConfig cfg1 = BuiltinConfig("cfg1");
  const Example e = MakeExample(set_->items[0], cfg1);
  EXPECT_GT(e.frames, 0);
  EXPECT_EQ(e.input.size(), static_cast<std::size_t>(e.frames) * 80);
  EXPECT_EQ(e.target.size(), e.input.size());
  EXPECT_EQ(e.features, EncodeConfigFeatures(SplitConfig(cfg1).non_normalizable));
  // Natural-log amplitudes with the 1e-5 floor, never [0,1] values.
  for (float v : e.target) EXPECT_GE(v, std::log(1e-5f) - 1e-4f);
  float lo = 0;
  for (float v : e.target) lo = std::min(lo, v);
  EXPECT_LT(lo, -1.0f);
}

TEST(TrainingConfigTest, Validation) {
  TrainingConfig t;
  EXPECT_EQ(t.epochs, 100);
  EXPECT_EQ(t.batch_size, 32);
  EXPECT_EQ(t.segment_frames, 200);
  EXPECT_EQ(t.halving_period, 50);
  EXPECT_DOUBLE_EQ(t.validation_fraction, 0.1);
  EXPECT_NO_THROW(ValidateTrainingConfig(t));
  t.validation_fraction = 1.0;
  EXPECT_THROW(ValidateTrainingConfig(t), InvalidInput);
  t = TrainingConfig{};
  t.epochs = 0;
  EXPECT_THROW(ValidateTrainingConfig(t), InvalidInput);
  t = TrainingConfig{};
  t.learning_rate = -1;
  EXPECT_THROW(ValidateTrainingConfig(t), InvalidInput);
}

}  // namespace
}  // namespace melbridge::nn
