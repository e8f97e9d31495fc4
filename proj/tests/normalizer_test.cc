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

#include "melbridge/normalizer.h"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "melbridge/config.h"
#include "melbridge/errors.h"
#include "test_util.h"

namespace melbridge {
namespace {

constexpr double kLn10 = std::numbers::ln10;

NormalizableParams Normalizable(const char* name) {
  return SplitConfig(BuiltinConfig(name)).normalizable;
}

// Base-space mel whose 20*log10 amplitudes lie in (-99, -1).
MelSpectrogram RandomBaseMel(std::mt19937_64& rng, const MelConfig& cfg, int frames = 12) {
  MelSpectrogram m;
  m.config = cfg;
  m.space = kBaseValueSpace;
  m.values = testing::RandomMatrix(rng, frames, cfg.n_mels, -99, -1) * (kLn10 / 20);
  return m;
}

TEST(NormalizerTest, Cfg1Examples) {
  const NormalizableParams p = Normalizable("cfg1");
  EXPECT_NEAR(ValueToBase(1.0, p), 0.0, 1e-15);
  EXPECT_NEAR(ValueToBase(0.5, p), -50 * kLn10 / 20, 1e-12);
  EXPECT_NEAR(ValueToBase(0.5, p), -5.7565, 1e-4);
  EXPECT_NEAR(BaseToValue(-50 * kLn10 / 20, p), 0.5, 1e-12);
}

TEST(NormalizerTest, Cfg2IsTheBase) {
  std::mt19937_64 rng(1);
  MelSpectrogram m = RandomBaseMel(rng, BuiltinConfig("cfg2"));
  m.space = ValueSpaceFor(Normalizable("cfg2"));
  EXPECT_EQ(m.space, kBaseValueSpace);
  EXPECT_EQ(ToBase(m).values, m.values);
  for (double v : {-11.0, -3.0, 0.0}) EXPECT_EQ(ValueToBase(v, kNormalizingBase), v);
}

TEST(NormalizerTest, BaseToLog10FactorOneDividesByLn10) {
  const NormalizableParams p = Normalizable("cfg4");
  for (double x : {-10.0, -2.5, 0.0}) EXPECT_NEAR(BaseToValue(x, p), x / kLn10, 1e-12);
}

TEST(NormalizerTest, Log10ToLnMultipliesByLn10) {
  std::mt19937_64 rng(2);
  const MelConfig cfg4 = BuiltinConfig("cfg4");
  const MelSpectrogram m = FromBase(RandomBaseMel(rng, cfg4), Normalizable("cfg4"));
  const MelSpectrogram out = ConvertNormalizable(m, Normalizable("cfg4"), kNormalizingBase);
  for (int i = 0; i < m.values.size(); ++i) {
    const double v = m.values.reshaped()(i);
    EXPECT_NEAR(out.values.reshaped()(i), v * kLn10, 1e-12 * std::abs(v * kLn10));
  }
}

TEST(NormalizerTest, RoundTripAllBuiltinSettings) {
  std::mt19937_64 rng(3);
  for (const MelConfig& cfg : BuiltinConfigs()) {
    const NormalizableParams p = SplitConfig(cfg).normalizable;
    const MelSpectrogram own = FromBase(RandomBaseMel(rng, cfg), p);
    EXPECT_EQ(own.space, ValueSpaceFor(p));
    EXPECT_EQ(own.config, cfg);
    const MelSpectrogram back = FromBase(ToBase(own), p);
    for (int i = 0; i < own.values.size(); ++i) {
      const double a = own.values.reshaped()(i), b = back.values.reshaped()(i);
      EXPECT_LE(std::abs(a - b), 1e-9 * std::abs(a)) << i;
    }
  }
}

TEST(NormalizerTest, ConversionsCompose) {
  std::mt19937_64 rng(4);
  const char* names[] = {"cfg1", "cfg2", "cfg4", "cfg5"};
  for (const char* a : names)
    for (const char* b : names)
      for (const char* c : names) {
        const MelSpectrogram m = FromBase(RandomBaseMel(rng, BuiltinConfig(a), 4), Normalizable(a));
        const MelSpectrogram ab = ConvertNormalizable(m, Normalizable(a), Normalizable(b));
        const MelSpectrogram abc = ConvertNormalizable(ab, Normalizable(b), Normalizable(c));
        const MelSpectrogram ac = ConvertNormalizable(m, Normalizable(a), Normalizable(c));
        for (int i = 0; i < m.values.size(); ++i) {
          const double x = abc.values.reshaped()(i), y = ac.values.reshaped()(i);
          EXPECT_LE(std::abs(x - y), 1e-9 * std::max(1.0, std::abs(y))) << a << b << c;
        }
      }
}

TEST(NormalizerTest, IdentitySettingsAreIdentity) {
  std::mt19937_64 rng(5);
  const MelSpectrogram m = FromBase(RandomBaseMel(rng, BuiltinConfig("cfg1")), Normalizable("cfg1"));
  const MelSpectrogram out = ConvertNormalizable(m, Normalizable("cfg1"), Normalizable("cfg1"));
  EXPECT_TRUE(out.values.isApprox(m.values, 1e-12));
}

TEST(NormalizerTest, StrictlyIncreasing) {
  NormalizableParams linear = kNormalizingBase;
  linear.amp_to_db = false;
  for (const NormalizableParams& p :
       {Normalizable("cfg1"), Normalizable("cfg2"), Normalizable("cfg4"), Normalizable("cfg5"), linear}) {
    double prev_value = -1e300, prev_base = -1e300;
    for (double x = std::log(1e-5) + 0.01; x < -0.01; x += 0.25) {
      const double v = BaseToValue(x, p);
      EXPECT_GT(v, prev_value);
      prev_value = v;
      const double back = ValueToBase(v, p);
      EXPECT_GT(back, prev_base);
      prev_base = back;
    }
  }
}

TEST(NormalizerTest, ClippedEndpoints) {
  const NormalizableParams p = Normalizable("cfg1");
  EXPECT_EQ(BaseToValue(-1000.0, p), 0.0);
  EXPECT_EQ(BaseToValue(5.0, p), 1.0);
  EXPECT_NEAR(ValueToBase(0.0, p), -100 * kLn10 / 20, 1e-12);
  EXPECT_THROW(ValueToBase(1.5, p), InvalidInput);
  EXPECT_THROW(ValueToBase(-0.1, p), InvalidInput);
}

TEST(NormalizerTest, LinearAmplitudeSpaceUsesFloor) {
  NormalizableParams linear = kNormalizingBase;
  linear.amp_to_db = false;
  EXPECT_NEAR(ValueToBase(0.0, linear), std::log(1e-5), 1e-12);
  EXPECT_NEAR(ValueToBase(0.25, linear), std::log(0.25), 1e-15);
  EXPECT_NEAR(BaseToValue(std::log(0.25), linear), 0.25, 1e-15);
}

TEST(NormalizerTest, SpaceMismatchRejected) {
  MelSpectrogram m;
  m.config = BuiltinConfig("cfg1");
  m.space = ValueSpace{ValueSpaceKind::kDb, LogBase::kTen, 1};
  m.values = RowMatrix::Zero(2, 80);
  EXPECT_THROW(ToBase(m), InvalidInput);
  EXPECT_THROW(FromBase(m, kNormalizingBase), InvalidInput);
}

}  // namespace
}  // namespace melbridge
