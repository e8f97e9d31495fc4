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

#include "melbridge/nn/optim.h"

#include <cmath>
#include <limits>
#include <string>

#include <gtest/gtest.h>

namespace melbridge::nn {
namespace {

ParameterMap<double> Single(double v) {
  ParameterMap<double> m;
  m["p"] = Tensor<double>({1}, v);
  return m;
}

TEST(AdamWTest, OneStepMatchesHandComputedUpdate) {
  AdamW<double> opt;
  ParameterMap<double> p = Single(1.0);
  ASSERT_TRUE(opt.Step(p, Single(0.5), 0.1));
  // Decay first: 1 - 0.1*0.01*1 = 0.999. Bias-corrected moments after one
  // step are g and g^2, so the Adam step is 0.1 * 0.5 / (0.5 + 1e-8).
  const double expected = 0.999 - 0.1 * 0.5 / (0.5 + 1e-8);
  EXPECT_NEAR(p["p"].data[0], expected, 1e-12);
  EXPECT_EQ(opt.step_count(), 1);
}

TEST(AdamWTest, TwoStepsMatchHandComputedUpdate) {
  AdamWOptions o;
  o.weight_decay = 0.0;
  AdamW<double> opt(o);
  ParameterMap<double> p = Single(0.0);
  opt.Step(p, Single(1.0), 0.01);
  opt.Step(p, Single(-2.0), 0.01);
  double m = 0, v = 0, x = 0;
  for (int t = 1; t <= 2; ++t) {
    const double g = t == 1 ? 1.0 : -2.0;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    x -= 0.01 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  EXPECT_NEAR(p["p"].data[0], x, 1e-12);
}

TEST(AdamWTest, ZeroGradientAndZeroDecayLeaveParamsUnchanged) {
  AdamWOptions o;
  o.weight_decay = 0.0;
  AdamW<double> opt(o);
  ParameterMap<double> p = Single(3.25);
  for (int i = 0; i < 5; ++i) opt.Step(p, Single(0.0), 0.1);
  EXPECT_EQ(p["p"].data[0], 3.25);
}

TEST(AdamWTest, ConstantGradientStepApproachesLearningRate) {
  AdamWOptions o;
  o.weight_decay = 0.0;
  AdamW<double> opt(o);
  ParameterMap<double> p = Single(0.0);
  double before = 0.0;
  for (int i = 0; i < 2000; ++i) {
    before = p["p"].data[0];
    opt.Step(p, Single(-0.3), 1e-3);
  }
  EXPECT_NEAR(p["p"].data[0] - before, 1e-3, 1e-9);
}

TEST(AdamWTest, NonFiniteGradientSkipsStep) {
  AdamW<double> opt;
  ParameterMap<double> p = Single(1.0);
  p["q"] = Tensor<double>({2}, 1.0);
  ParameterMap<double> g = Single(0.5);
  g["q"] = Tensor<double>({2}, 0.1);
  g["q"].data[1] = std::numeric_limits<double>::infinity();
  std::string bad;
  EXPECT_FALSE(opt.Step(p, g, 0.1, &bad));
  EXPECT_EQ(bad, "q");
  EXPECT_EQ(p["p"].data[0], 1.0);
  EXPECT_EQ(p["q"].data, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(opt.step_count(), 0);
  g["q"].data[1] = 0.1;
  EXPECT_TRUE(opt.Step(p, g, 0.1));
  EXPECT_EQ(opt.step_count(), 1);
}

TEST(AdamWTest, ParametersWithoutGradientsAreUntouched) {
  AdamW<float> opt;
  ParameterMap<float> p;
  p["a"] = Tensor<float>({1}, 1.0f);
  p["b"] = Tensor<float>({1}, 2.0f);
  ParameterMap<float> g;
  g["a"] = Tensor<float>({1}, 1.0f);
  opt.Step(p, g, 0.1);
  EXPECT_NE(p["a"].data[0], 1.0f);
  EXPECT_EQ(p["b"].data[0], 2.0f);
}

TEST(LearningRateTest, HalvesEveryFiftyEpochs) {
  EXPECT_DOUBLE_EQ(StepDecayLearningRate(0), 1e-3);
  EXPECT_DOUBLE_EQ(StepDecayLearningRate(49), 1e-3);
  EXPECT_DOUBLE_EQ(StepDecayLearningRate(50), 5e-4);
  EXPECT_DOUBLE_EQ(StepDecayLearningRate(99), 5e-4);
  EXPECT_DOUBLE_EQ(StepDecayLearningRate(100), 2.5e-4);
  EXPECT_DOUBLE_EQ(StepDecayLearningRate(7, 2e-3, 5), 1e-3);
}

}  // namespace
}  // namespace melbridge::nn
