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

#include "melbridge/config.h"

#include <cmath>
#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "melbridge/errors.h"

namespace melbridge {
namespace {

TEST(BuiltinConfigTest, Cfg1MatchesReferenceTable) {
  const MelConfig c = BuiltinConfig("cfg1");
  EXPECT_EQ(c.wave_peak_norm, 1.0);
  EXPECT_EQ(c.n_fft, 2048);
  EXPECT_EQ(c.win_length, 1100);
  EXPECT_EQ(c.hop_length, 275);
  EXPECT_EQ(c.left_pad, 0);
  EXPECT_EQ(c.right_pad, 0);
  EXPECT_EQ(c.fmin, 40.0);
  EXPECT_EQ(c.fmax, 11025.0);
  EXPECT_TRUE(c.amp_to_db);
  EXPECT_EQ(c.log_base, LogBase::kTen);
  EXPECT_EQ(c.log_factor, 20);
  EXPECT_TRUE(c.normalize_mel);
  EXPECT_EQ(c.ref_level_db, 0.0);
  EXPECT_EQ(c.min_level_db, -100.0);
}

TEST(BuiltinConfigTest, Cfg3HasCenterPadding) {
  const MelConfig c = BuiltinConfig("cfg3");
  EXPECT_EQ(c.n_fft, 1024);
  EXPECT_EQ(c.win_length, 1024);
  EXPECT_EQ(c.hop_length, 256);
  EXPECT_EQ(c.left_pad, 384);
  EXPECT_EQ(c.right_pad, 384);
  EXPECT_EQ(c.fmin, 0.0);
  EXPECT_EQ(c.fmax, 8000.0);
  EXPECT_EQ(c.log_base, LogBase::kE);
  EXPECT_EQ(c.log_factor, 1);
  EXPECT_FALSE(c.normalize_mel);
}

TEST(BuiltinConfigTest, Cfg7IsSixteenKilohertz) {
  const MelConfig c = BuiltinConfig("cfg7");
  EXPECT_EQ(c.n_fft, 465);
  EXPECT_EQ(c.win_length, 465);
  EXPECT_EQ(c.hop_length, 160);
  EXPECT_EQ(c.fmin, 80.0);
  EXPECT_EQ(c.fmax, 8000.0);
  EXPECT_EQ(c.sample_rate, 16000);
}

TEST(BuiltinConfigTest, Cfg4PeakAndCfg5Rate) {
  EXPECT_EQ(BuiltinConfig("cfg4").wave_peak_norm, 0.95);
  const MelConfig c5 = BuiltinConfig("cfg5");
  EXPECT_GE(c5.sample_rate / 2.0, c5.fmax);
}

TEST(BuiltinConfigTest, UnknownNameThrows) {
  EXPECT_THROW(BuiltinConfig("cfg9"), InvalidInput);
  EXPECT_THROW(ResolveConfig("no/such/file.conf"), std::exception);
}

TEST(BuiltinConfigTest, SevenDistinctValidConfigs) {
  const auto all = BuiltinConfigs();
  ASSERT_EQ(all.size(), 7u);
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_NO_THROW(ValidateConfig(all[i]));
    for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(all[i] == all[j]) << i << " " << j;
  }
}

TEST(ParseConfigTest, Cfg2Document) {
  const MelConfig c = ParseConfig(
      "# cfg2\n"
      "n_fft = 1024\nwin_length = 1024\nhop_length = 256\n"
      "fmin = 0\nfmax = 8000\nlog_base = e\nlog_factor = 1\n"
      "normalize_mel = false\n");
  EXPECT_EQ(c, BuiltinConfig("cfg2"));
}

TEST(ParseConfigTest, EmptyDocumentGivesDefaults) {
  const MelConfig c = ParseConfig("");
  EXPECT_EQ(c, MelConfig{});
  EXPECT_EQ(c.sample_rate, 22050);
  EXPECT_EQ(c.n_mels, 80);
}

TEST(ParseConfigTest, FmaxAboveNyquistRejected) {
  EXPECT_THROW(ParseConfig("sample_rate = 22050\nfmax = 12000\n"), InvalidInput);
  EXPECT_NO_THROW(ParseConfig("sample_rate = 24000\nfmax = 12000\n"));
}

TEST(ParseConfigTest, MalformedDocumentsRejected) {
  EXPECT_THROW(ParseConfig("n_fft 1024\n"), InvalidInput);
  EXPECT_THROW(ParseConfig("n_fft = many\n"), InvalidInput);
  EXPECT_THROW(ParseConfig("hop_length = 0\n"), InvalidInput);
  EXPECT_THROW(ParseConfig("log_base = 2\n"), InvalidInput);
  EXPECT_THROW(ParseConfig("log_factor = 10\n"), InvalidInput);
  EXPECT_THROW(ParseConfig("amp_to_db = yes\n"), InvalidInput);
  EXPECT_THROW(ParseConfig("win_length = 2048\n"), InvalidInput);
}

TEST(ParseConfigTest, ErrorNamesField) {
  try {
    ParseConfig("hop_length = -3\n");
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("hop_length"), std::string::npos);
  }
}

TEST(ParseConfigTest, SerializeRoundTripBuiltinsAndSamples) {
  for (const MelConfig& c : BuiltinConfigs()) EXPECT_EQ(ParseConfig(SerializeConfig(c)), c);
  std::mt19937_64 rng(5);
  const auto exclude = BuiltinConfigs();
  for (int i = 0; i < 200; ++i) {
    const MelConfig c = SampleRandomConfig(rng, exclude);
    EXPECT_EQ(ParseConfig(SerializeConfig(c)), c);
  }
}

TEST(SplitConfigTest, Cfg1Halves) {
  const ConfigParts p = SplitConfig(BuiltinConfig("cfg1"));
  const NonNormalizableParams a{1.0, 2048, 1100, 275, 0, 0, 40, 11025};
  const NormalizableParams b{true, LogBase::kTen, 20, true, 0, -100};
  EXPECT_EQ(p.non_normalizable, a);
  EXPECT_EQ(p.normalizable, b);
}

TEST(SplitConfigTest, RecombineIsIdentity) {
  for (const MelConfig& c : BuiltinConfigs()) {
    EXPECT_EQ(CombineConfig(SplitConfig(c)), c);
    EXPECT_EQ(SplitConfig(c), SplitConfig(c));
  }
}

TEST(SplitConfigTest, Cfg2NormalizableHalfIsTheBase) {
  EXPECT_EQ(SplitConfig(BuiltinConfig("cfg2")).normalizable, kNormalizingBase);
}

TEST(ConfigFeaturesTest, Cfg2RawVector) {
  const ConfigFeatureVector f = RawConfigFeatures(SplitConfig(BuiltinConfig("cfg2")).non_normalizable);
  const double expected[8] = {1.0, 1024, std::log(1024.0), std::log(256.0), 0, 0, 0, 8000};
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(f[i], expected[i], 1e-12) << i;
  EXPECT_NEAR(f[2], 6.9315, 1e-4);
  EXPECT_NEAR(f[3], 5.5452, 1e-4);
}

TEST(ConfigFeaturesTest, FmaxChangeTouchesOnlyLastDimension) {
  NonNormalizableParams a = SplitConfig(BuiltinConfig("cfg2")).non_normalizable;
  NonNormalizableParams b = a;
  b.fmax = 7600;
  const auto fa = EncodeConfigFeatures(a), fb = EncodeConfigFeatures(b);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(fa[i], fb[i]);
  EXPECT_NE(fa[7], fb[7]);
}

TEST(ConfigFeaturesTest, Cfg3DiffersFromCfg2OnlyInPads) {
  const auto f2 = RawConfigFeatures(SplitConfig(BuiltinConfig("cfg2")).non_normalizable);
  const auto f3 = RawConfigFeatures(SplitConfig(BuiltinConfig("cfg3")).non_normalizable);
  for (int i = 0; i < 8; ++i) {
    if (i == 4 || i == 5) {
      EXPECT_EQ(f2[i], 0.0);
      EXPECT_EQ(f3[i], 384.0);
    } else {
      EXPECT_EQ(f2[i], f3[i]) << i;
    }
  }
}

TEST(ConfigFeaturesTest, EncodingInjectiveAndInUnitRangeOnGrid) {
  // Enumerate the sampling grid, with the peak at its two ends.
  std::set<ConfigFeatureVector> seen;
  int count = 0;
  for (double peak : {0.9, 1.0})
    for (int n_fft : {1024, 2048})
      for (int win : {800, 900, 1024, 1100, 1200}) {
        if (win > n_fft) continue;
        const int hop = win / 4;
        for (int lp : {0, (n_fft - hop) / 2})
          for (int rp : {0, (n_fft - hop) / 2})
            for (double fmin : {0.0, 30.0, 50.0, 70.0, 90.0})
              for (double fmax : {7600.0, 8000.0, 9500.0, 11025.0}) {
                const NonNormalizableParams p{peak, n_fft, win, hop, lp, rp, fmin, fmax};
                const ConfigFeatureVector f = EncodeConfigFeatures(p);
                for (double v : f) {
                  EXPECT_GE(v, -1e-12);
                  EXPECT_LE(v, 1.0 + 1e-12);
                }
                seen.insert(f);
                ++count;
              }
      }
  EXPECT_EQ(seen.size(), static_cast<std::size_t>(count));
}

TEST(SampleRandomConfigTest, ExcludesBuiltinsAndValidates) {
  const auto exclude = BuiltinConfigs();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const MelConfig c = SampleRandomConfig(rng, exclude);
    EXPECT_NO_THROW(ValidateConfig(c));
    for (const MelConfig& e : exclude) EXPECT_FALSE(c == e);
    EXPECT_EQ(c.hop_length, c.win_length / 4);
    EXPECT_GE(c.wave_peak_norm, 0.9);
    EXPECT_LE(c.wave_peak_norm, 1.0);
  }
}

TEST(SampleRandomConfigTest, SeededSequenceRepeats) {
  std::mt19937_64 a(3), b(3);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(SampleRandomConfig(a, {}), SampleRandomConfig(b, {}));
}

TEST(SampleRandomConfigTest, ExhaustionThrows) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(SampleRandomConfig(rng, {}, 0), std::runtime_error);
}

}  // namespace
}  // namespace melbridge
