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

#include "melbridge/stage1.h"

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "melbridge/audio.h"
#include "melbridge/config.h"
#include "melbridge/errors.h"
#include "melbridge/mel.h"
#include "melbridge/normalizer.h"
#include "melbridge/synthetic.h"
#include "test_util.h"

namespace melbridge {
namespace {

// Minimum-norm least squares through the normal equations of the row space.
Eigen::VectorXd NormalEquationsSolve(const RowMatrix& fb, const Eigen::VectorXd& mel) {
  const Eigen::MatrixXd gram = fb * fb.transpose();
  return fb.transpose() * gram.ldlt().solve(mel);
}

TEST(PseudoInverseTest, MatchesNormalEquationsOracle) {
  std::mt19937_64 rng(1);
  for (const char* name : {"cfg1", "cfg2", "cfg3", "cfg4"}) {
    const MelFilterbank fb = MelFilterbank::FromConfig(BuiltinConfig(name));
    const RowMatrix pinv = PseudoInverse(fb);
    ASSERT_EQ(pinv.rows(), fb.num_bins());
    ASSERT_EQ(pinv.cols(), fb.n_mels());
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd x = testing::RandomMatrix(rng, fb.num_bins(), 1, 0, 1);
      const Eigen::VectorXd mel = fb.weights() * x;
      const Eigen::VectorXd rec = pinv * mel;
      EXPECT_LE((fb.weights() * rec - mel).norm(), 1e-6 * mel.norm()) << name;
      const Eigen::VectorXd oracle = NormalEquationsSolve(fb.weights(), mel);
      EXPECT_LE((rec - oracle).norm(), 1e-6 * oracle.norm()) << name;
    }
  }
}

TEST(PseudoInverseTest, ProjectionIsIdempotent) {
  const MelFilterbank fb = MelFilterbank::FromConfig(BuiltinConfig("cfg2"));
  const RowMatrix proj = PseudoInverse(fb) * fb.weights();
  EXPECT_LE((proj * proj - proj).norm(), 1e-6 * proj.norm());
}

TEST(PseudoInverseTest, CachedMatchesDirect) {
  const MelConfig cfg = BuiltinConfig("cfg3");
  EXPECT_EQ(CachedPseudoInverse(cfg), PseudoInverse(MelFilterbank::FromConfig(cfg)));
  EXPECT_EQ(&CachedPseudoInverse(cfg), &CachedPseudoInverse(cfg));
}

TEST(MelToLinearTest, ZeroInZeroOutAndNonNegative) {
  const MelConfig cfg = BuiltinConfig("cfg2");
  const RowMatrix& pinv = CachedPseudoInverse(cfg);
  const StftGeometry g = StftGeometry::FromConfig(cfg);
  const LinearSpectrogram zero = MelToLinear(RowMatrix::Zero(5, 80), pinv, g, cfg.sample_rate);
  EXPECT_EQ(zero.magnitudes.rows(), 5);
  EXPECT_EQ(zero.magnitudes.cols(), g.NumBins());
  EXPECT_EQ(zero.magnitudes.maxCoeff(), 0.0);
  std::mt19937_64 rng(2);
  const LinearSpectrogram lin =
      MelToLinear(testing::RandomMatrix(rng, 5, 80, 0, 1), pinv, g, cfg.sample_rate);
  EXPECT_GE(lin.magnitudes.minCoeff(), 0.0);
}

LinearSpectrogram SpectrogramOf(const Waveform& w, const MelConfig& cfg) {
  return Magnitude(Stft(w, StftGeometry::FromConfig(cfg)));
}

TEST(GriffinLimTest, ConsistencyNonIncreasingAndHalved) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 3; ++i) {
    const GriffinLimResult r = GriffinLim(SpectrogramOf(SyntheticClip(rng), BuiltinConfig("cfg2")));
    ASSERT_EQ(r.consistency.size(), 32u);
    EXPECT_EQ(r.iterations_run, 32);
    for (std::size_t k = 1; k < r.consistency.size(); ++k)
      EXPECT_LE(r.consistency[k], r.consistency[k - 1] + 1e-6) << k;
    EXPECT_LE(r.consistency.back(), 0.5 * r.consistency.front());
  }
}

// Plain Griffin-Lim from zero phase does not reach the exact phase of a
// real signal in 32 iterations; the construction itself is the fixed point.
TEST(GriffinLimTest, SelfConsistentSpectrogramIsFixedPoint) {
  const MelConfig cfg = BuiltinConfig("cfg2");
  const Waveform sine = Sine(440, 0.5, 22050);
  const LinearSpectrogram s = SpectrogramOf(sine, cfg);
  EXPECT_LT(SpectralInconsistency(s.magnitudes, s.magnitudes, cfg.n_fft), 1e-15);
  const GriffinLimResult r = GriffinLim(s);
  EXPECT_LE(r.consistency.back(), 0.5 * r.consistency.front());
}

TEST(GriffinLimTest, ZeroMagnitudesShortCircuit) {
  LinearSpectrogram s;
  s.geometry = StftGeometry{256, 256, 64, 0, 0};
  s.magnitudes = RowMatrix::Zero(8, 129);
  const GriffinLimResult r = GriffinLim(s);
  EXPECT_EQ(r.iterations_run, 0);
  EXPECT_TRUE(r.consistency.empty());
  EXPECT_EQ(r.waveform.size(), s.geometry.SynthesisLength(8));
  EXPECT_EQ(MaxAbs(r.waveform), 0.0);
}

TEST(GriffinLimTest, ProgressHookCanCancel) {
  int calls = 0;
  GriffinLimOptions options;
  options.progress = [&](int iteration, double) {
    ++calls;
    return iteration < 5;
  };
  const GriffinLimResult r =
      GriffinLim(SpectrogramOf(Sine(300, 0.3, 22050), BuiltinConfig("cfg2")), options);
  EXPECT_EQ(calls, 5);
  EXPECT_EQ(r.iterations_run, 5);
  EXPECT_TRUE(r.cancelled);
}

TEST(GriffinLimTest, StateMatchesOneShot) {
  const LinearSpectrogram s = SpectrogramOf(Sine(300, 0.3, 22050), BuiltinConfig("cfg2"));
  GriffinLimState state(s);
  for (int i = 0; i < 4; ++i) state.Step();
  GriffinLimOptions options;
  options.iterations = 4;
  const GriffinLimResult r = GriffinLim(s, options);
  EXPECT_EQ(state.consistency(), r.consistency);
  EXPECT_EQ(state.CurrentWaveform().samples, r.waveform.samples);
}

double RelativeL1InBase(const MelSpectrogram& a, const MelSpectrogram& b) {
  const RowMatrix x = ToBase(a).values, y = ToBase(b).values;
  const int frames = std::min(x.rows(), y.rows());
  return (x.topRows(frames) - y.topRows(frames)).cwiseAbs().sum() /
         y.topRows(frames).cwiseAbs().sum();
}

TEST(ApproximateConvertTest, SameConfigIsBoundedIdentity) {
  const MelConfig cfg2 = BuiltinConfig("cfg2");
  const MelSpectrogram m = ExtractMel(Sine(220, 1.0, 22050), cfg2);
  const MelSpectrogram out = ApproximateConvert(m, cfg2);
  EXPECT_EQ(out.frames(), m.frames());
  EXPECT_LE(RelativeL1InBase(out, m), 0.15);
}

TEST(ApproximateConvertTest, SilenceStaysAtFloor) {
  const MelConfig cfg1 = BuiltinConfig("cfg1");
  const MelSpectrogram m =
      ExtractMel(Waveform{std::vector<double>(22050, 0.0), 22050}, BuiltinConfig("cfg2"));
  const MelSpectrogram out = ApproximateConvert(m, cfg1);
  EXPECT_EQ(out.values.maxCoeff(), 0.0);
  EXPECT_EQ(out.values.minCoeff(), 0.0);
}

TEST(ApproximateConvertTest, Cfg2ToCfg1Sine) {
  const MelConfig cfg1 = BuiltinConfig("cfg1");
  const Waveform sine = Sine(220, 1.0, 22050);
  const MelSpectrogram m = ExtractMel(sine, BuiltinConfig("cfg2"));
  const MelSpectrogram out = ApproximateConvert(m, cfg1);
  EXPECT_EQ(out.config, cfg1);
  EXPECT_EQ(out.space, ValueSpaceFor(SplitConfig(cfg1).normalizable));
  EXPECT_NEAR(out.frames(), StftGeometry::FromConfig(cfg1).NumFrames(sine.size()), 1);
  EXPECT_GE(out.values.minCoeff(), 0.0);
  EXPECT_LE(out.values.maxCoeff(), 1.0);

  // A full-scale tone saturates cfg1's [0,1] range over several bins, so the
  // peak is located with cfg1's filterbank in an unclipped space.
  ConfigParts parts = SplitConfig(cfg1);
  parts.normalizable = kNormalizingBase;
  const MelSpectrogram open = ApproximateConvert(m, CombineConfig(parts));
  const auto centers = MelFilterbank::FromConfig(cfg1).CenterFrequencies();
  for (int f = 2; f + 2 < open.frames(); ++f) {
    Eigen::Index arg;
    open.values.row(f).maxCoeff(&arg);
    EXPECT_LT(std::abs(centers[arg] - 220.0), 41.0) << "frame " << f;
  }
}

TEST(ApproximateConvertTest, DurationPreservedAcrossConfigs) {
  std::mt19937_64 rng(4);
  const Waveform w = SyntheticClip(rng);
  const MelSpectrogram src = ExtractMel(w, BuiltinConfig("cfg3"));
  for (const MelConfig& tgt : BuiltinConfigs()) {
    const MelSpectrogram out = ApproximateConvert(src, tgt);
    const std::size_t n = static_cast<std::size_t>(
        std::llround(w.DurationSeconds() * tgt.sample_rate));
    EXPECT_NEAR(out.frames(), StftGeometry::FromConfig(tgt).NumFrames(n), 1) << tgt.n_fft;
    if (tgt.normalize_mel) {
      EXPECT_GE(out.values.minCoeff(), 0.0);
      EXPECT_LE(out.values.maxCoeff(), 1.0);
    }
  }
}

TEST(ApproximateConvertTest, AcceptsBaseSpaceInputAndIsDeterministic) {
  std::mt19937_64 rng(5);
  const MelSpectrogram m = ExtractMel(SyntheticClip(rng), BuiltinConfig("cfg1"));
  const MelConfig tgt = BuiltinConfig("cfg4");
  const MelSpectrogram a = ApproximateConvert(m, tgt);
  EXPECT_EQ(a.values, ApproximateConvert(m, tgt).values);
  EXPECT_TRUE(ApproximateConvert(ToBase(m), tgt).values.isApprox(a.values, 1e-9));
}

}  // namespace
}  // namespace melbridge
