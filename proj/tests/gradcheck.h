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

#ifndef MELBRIDGE_TESTS_GRADCHECK_H_
#define MELBRIDGE_TESTS_GRADCHECK_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "melbridge/nn/autograd.h"
#include "melbridge/nn/layers.h"
#include "melbridge/nn/unet.h"
#include "melbridge/random.h"

namespace melbridge::testing {

// Finite-difference check of every analytic gradient of L = sum(unet(x) * R)
// in double precision, using the five-point central stencil
//   (8 (L(+h) - L(-h)) - (L(+2h) - L(-2h))) / 12h.
// Relative error is |a - n| / max(|a|, |n|, magnitude_floor). The floor
// exists because roundoff in L (about 1e-15 |L|, with |L| in the hundreds)
// puts an absolute noise of about 2e-8 on every numeric derivative, and
// some gradients are exactly zero (a conv bias feeding train-mode batch
// norm); below the floor the check is absolute (1e-7 at rel 1e-5).
struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst;
  std::size_t checked = 0;
  std::size_t input_checked = 0;
  // Entries whose stencil crossed a PReLU or max-pool kink; the loss is not
  // differentiable across those points, so they are not compared.
  std::size_t at_kink = 0;
  // Parameter tensors with no compared entry (all at kinks).
  std::vector<std::string> uncovered;
};

struct GradCheckSetup {
  nn::UNetWeights<double> weights;
  nn::Tensor<double> input, features, probe;
};

inline GradCheckSetup MakeGradCheckSetup(std::uint64_t seed, int batch = 2, int frames = 16,
                                         int mels = 16) {
  std::mt19937_64 rng(seed);
  GradCheckSetup s;
  nn::UNetSpec spec{2, 8, mels, kConfigFeatureDim};
  s.weights = nn::InitUNetWeights<double>(spec, seed);
  // Move every tensor off its structured initial value so no path is
  // trivially zero (zeroed output projection, identity FiLM, unit BN).
  for (auto& [name, t] : s.weights.tensors) {
    for (double& v : t.data) {
      if (name.find("running_var") != std::string::npos) {
        v = UniformRange(rng, 0.5, 1.5);
      } else if (name.find("film.slope") != std::string::npos) {
        v = UniformRange(rng, 0.1, 0.4);
      } else if (name.find("hyper") != std::string::npos) {
        v = UniformRange(rng, -0.2, 0.2);
      } else {
        v += UniformRange(rng, -0.3, 0.3);
      }
    }
  }
  s.input = nn::Tensor<double>({batch, 1, frames, mels});
  for (double& v : s.input.data) v = StandardNormal(rng);
  s.features = nn::Tensor<double>({batch, kConfigFeatureDim});
  for (double& v : s.features.data) v = UniformUnit(rng);
  s.probe = nn::Tensor<double>({batch, 1, frames, mels});
  for (double& v : s.probe.data) v = StandardNormal(rng);
  return s;
}

inline double ProbeLoss(const GradCheckSetup& s, const nn::UNetWeights<double>& w,
                        const nn::Tensor<double>& input, nn::Mode mode,
                        std::uint64_t* signature = nullptr) {
  nn::Tape<double> tape;
  const int in = tape.Constant(input);
  const int feat = tape.Constant(s.features);
  const int out = nn::UNetForward(tape, in, feat, w, mode);
  if (signature) *signature = tape.branch_signature();
  return tape.value(nn::WeightedSum(tape, out, s.probe)).data[0];
}

inline GradCheckReport CheckUNetGradients(const GradCheckSetup& s, nn::Mode mode,
                                          double step = 1e-4, double magnitude_floor = 1e-2) {
  nn::Tape<double> tape;
  const int in = tape.Variable(s.input);
  const int feat = tape.Constant(s.features);
  const int out = nn::UNetForward(tape, in, feat, s.weights, mode);
  tape.Backward(nn::WeightedSum(tape, out, s.probe));
  const auto grads = tape.ParameterGradients();
  const nn::Tensor<double> input_grad = tape.grad(in);

  GradCheckReport report;
  auto record = [&](double analytic, double numeric, const std::string& what) {
    const double rel = std::abs(analytic - numeric) /
                       std::max({std::abs(analytic), std::abs(numeric), magnitude_floor});
    if (rel >= report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst = what + " analytic=" + std::to_string(analytic) +
                     " numeric=" + std::to_string(numeric);
    }
  };
  const std::uint64_t center = tape.branch_signature();
  // Returns false when some stencil point leaves the center's linear region.
  auto stencil = [&](auto&& loss_at, double* numeric) {
    double l[4];
    const double offsets[4] = {step, -step, 2 * step, -2 * step};
    for (int k = 0; k < 4; ++k) {
      std::uint64_t sig = 0;
      l[k] = loss_at(offsets[k], &sig);
      if (sig != center) return false;
    }
    *numeric = (8.0 * (l[0] - l[1]) - (l[2] - l[3])) / (12.0 * step);
    return true;
  };
  nn::UNetWeights<double> w = s.weights;
  for (const auto& [name, g] : grads) {
    nn::Tensor<double>& t = w.tensors.at(name);
    const std::size_t before = report.checked;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t.data[i];
      double numeric = 0.0;
      const bool smooth = stencil(
          [&](double d, std::uint64_t* sig) {
            t.data[i] = saved + d;
            const double l = ProbeLoss(s, w, s.input, mode, sig);
            t.data[i] = saved;
            return l;
          },
          &numeric);
      if (!smooth) {
        ++report.at_kink;
        continue;
      }
      record(g.data[i], numeric, name + "[" + std::to_string(i) + "]");
      ++report.checked;
    }
    if (report.checked == before) report.uncovered.push_back(name);
  }
  nn::Tensor<double> x = s.input;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x.data[i];
    double numeric = 0.0;
    const bool smooth = stencil(
        [&](double d, std::uint64_t* sig) {
          x.data[i] = saved + d;
          const double l = ProbeLoss(s, s.weights, x, mode, sig);
          x.data[i] = saved;
          return l;
        },
        &numeric);
    if (!smooth) {
      ++report.at_kink;
      continue;
    }
    record(input_grad.data[i], numeric, "input[" + std::to_string(i) + "]");
    ++report.input_checked;
  }
  return report;
}

}  // namespace melbridge::testing

#endif  // MELBRIDGE_TESTS_GRADCHECK_H_
