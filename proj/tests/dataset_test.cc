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

#include "melbridge/nn/dataset.h"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "melbridge/audio.h"
#include "melbridge/config.h"
#include "melbridge/errors.h"
#include "melbridge/mel.h"
#include "melbridge/stage1.h"
#include "melbridge/synthetic.h"
#include "test_util.h"

namespace melbridge::nn {
namespace {

class PrepareTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new std::vector<Waveform>(SyntheticCorpus(10, 4, 0.4));
    ids_ = new std::vector<std::string>();
    for (int i = 0; i < 10; ++i) ids_->push_back("clip_" + std::to_string(i));
    PrepareOptions o;
    o.n_subsets = 5;
    o.seed = 17;
    set_ = new PreparedSet(PrepareTrainingSet(*corpus_, *ids_, o));
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete ids_;
    delete set_;
  }
  static std::vector<Waveform>* corpus_;
  static std::vector<std::string>* ids_;
  static PreparedSet* set_;
};

std::vector<Waveform>* PrepareTest::corpus_ = nullptr;
std::vector<std::string>* PrepareTest::ids_ = nullptr;
PreparedSet* PrepareTest::set_ = nullptr;

TEST_F(PrepareTest, SubsetsPartitionTheCorpus) {
  ASSERT_EQ(set_->items.size(), 10u);
  ASSERT_EQ(set_->subset_configs.size(), 5u);
  std::map<int, int> sizes;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < set_->items.size(); ++i) {
    const PreparedItem& item = set_->items[i];
    EXPECT_EQ(item.id, (*ids_)[i]);
    EXPECT_TRUE(seen.insert(item.id).second);
    ASSERT_GE(item.subset, 0);
    ASSERT_LT(item.subset, 5);
    ++sizes[item.subset];
    EXPECT_EQ(item.original.samples, (*corpus_)[i].samples);
  }
  EXPECT_EQ(sizes.size(), 5u);
  for (const auto& [s, n] : sizes) EXPECT_EQ(n, 2) << s;
}

TEST_F(PrepareTest, SourceConfigsAvoidTestConfigs) {
  for (const MelConfig& c : set_->subset_configs) {
    EXPECT_NO_THROW(ValidateConfig(c));
    for (const MelConfig& b : BuiltinConfigs()) EXPECT_FALSE(c == b);
  }
}

TEST_F(PrepareTest, IntermediateIsStageOneOfTheSubsetConfig) {
  const PreparedItem& item = set_->items[3];
  const MelConfig& src = set_->subset_configs[item.subset];
  EXPECT_EQ(item.intermediate.sample_rate, src.sample_rate);
  EXPECT_EQ(item.intermediate.samples, IntermediateWaveform(ExtractMel(item.original, src)).samples);
}

TEST_F(PrepareTest, FixedSeedGivesIdenticalManifest) {
  PrepareOptions o;
  o.n_subsets = 5;
  o.seed = 17;
  EXPECT_EQ(ManifestJson(PrepareTrainingSet(*corpus_, *ids_, o)), ManifestJson(*set_));
  o.seed = 18;
  EXPECT_NE(ManifestJson(PrepareTrainingSet(*corpus_, *ids_, o)), ManifestJson(*set_));
}

TEST_F(PrepareTest, SaveLoadRoundTrip) {
  testing::TempDir dir;
  SavePreparedSet(*set_, dir / "prep");
  const PreparedSet loaded = LoadPreparedSet(dir / "prep");
  EXPECT_EQ(loaded.seed, set_->seed);
  EXPECT_EQ(loaded.subset_configs, set_->subset_configs);
  ASSERT_EQ(loaded.items.size(), set_->items.size());
  for (std::size_t i = 0; i < loaded.items.size(); ++i) {
    EXPECT_EQ(loaded.items[i].id, set_->items[i].id);
    EXPECT_EQ(loaded.items[i].subset, set_->items[i].subset);
    EXPECT_EQ(loaded.items[i].original.size(), set_->items[i].original.size());
    EXPECT_EQ(loaded.items[i].intermediate.size(), set_->items[i].intermediate.size());
  }
  EXPECT_EQ(ManifestJson(loaded), ManifestJson(*set_));
  SavePreparedSet(loaded, dir / "again");
  EXPECT_EQ(testing::ReadBytes(dir / "prep/manifest.json"),
            testing::ReadBytes(dir / "again/manifest.json"));
}

TEST(PrepareValidationTest, RejectsBadInputs) {
  const std::vector<Waveform> corpus = SyntheticCorpus(2, 1, 0.2);
  PrepareOptions o;
  o.n_subsets = 2;
  EXPECT_THROW(PrepareTrainingSet(corpus, {"a", "a"}, o), InvalidInput);
  EXPECT_THROW(PrepareTrainingSet(corpus, {"a", "b/c"}, o), InvalidInput);
  EXPECT_THROW(PrepareTrainingSet(corpus, {"a", ""}, o), InvalidInput);
  EXPECT_THROW(PrepareTrainingSet(corpus, {"a"}, o), InvalidInput);
  EXPECT_THROW(PrepareTrainingSet({}, {}, o), InvalidInput);
  o.n_subsets = 0;
  EXPECT_THROW(PrepareTrainingSet(corpus, {"a", "b"}, o), InvalidInput);
  EXPECT_THROW(LoadPreparedSet("/nonexistent/prep"), IoError);
}

}  // namespace
}  // namespace melbridge::nn
