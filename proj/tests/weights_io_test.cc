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

#include "melbridge/nn/weights_io.h"

#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "melbridge/errors.h"
#include "melbridge/random.h"
#include "test_util.h"

namespace melbridge::nn {
namespace {

UNetWeights<float> RandomWeights(std::uint64_t seed) {
  UNetWeights<float> w = InitUNetWeights<float>(UNetSpec{2, 8, 80, 8}, seed);
  std::mt19937_64 rng(seed);
  for (auto& [name, t] : w.tensors)
    for (float& v : t.data) v += static_cast<float>(UniformRange(rng, 0.0, 0.5));
  return w;
}

TEST(WeightsIoTest, RoundTripIsByteIdentical) {
  testing::TempDir dir;
  const UNetWeights<float> w = RandomWeights(1);
  WriteWeights(w, dir / "a.uaw");
  const UNetWeights<float> r = ReadWeights(dir / "a.uaw");
  EXPECT_EQ(r.spec, w.spec);
  EXPECT_EQ(r.tensors, w.tensors);
  WriteWeights(r, dir / "b.uaw");
  EXPECT_EQ(testing::ReadBytes(dir / "a.uaw"), testing::ReadBytes(dir / "b.uaw"));
}

TEST(WeightsIoTest, HeaderLayout) {
  const UNetWeights<float> w = RandomWeights(2);
  const std::string bytes = EncodeWeights(w);
  ASSERT_GE(bytes.size(), 28u);
  EXPECT_EQ(bytes.substr(0, 4), "UAW1");
  std::uint32_t fields[6];
  std::memcpy(fields, bytes.data() + 4, sizeof(fields));
  EXPECT_EQ(fields[0], kWeightsFileVersion);
  EXPECT_EQ(fields[1], 2u);
  EXPECT_EQ(fields[2], 8u);
  EXPECT_EQ(fields[3], 80u);
  EXPECT_EQ(fields[4], 8u);
  EXPECT_EQ(fields[5], w.tensors.size());
}

TEST(WeightsIoTest, CorruptionRejected) {
  const std::string good = EncodeWeights(RandomWeights(3));
  EXPECT_THROW(DecodeWeights("UAW2" + good.substr(4)), IoError);
  EXPECT_THROW(DecodeWeights(good.substr(0, good.size() - 3)), IoError);
  EXPECT_THROW(DecodeWeights(good + "zz"), IoError);
  std::string wrong_version = good;
  wrong_version[4] = 9;
  EXPECT_THROW(DecodeWeights(wrong_version), IoError);
  // Channel plan that disagrees with the stored tensors.
  std::string wrong_plan = good;
  wrong_plan[12] = 16;
  EXPECT_THROW(DecodeWeights(wrong_plan), InvalidInput);
  EXPECT_THROW(ReadWeights("/nonexistent/w.uaw"), IoError);
}

}  // namespace
}  // namespace melbridge::nn
