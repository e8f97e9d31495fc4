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

#ifndef MELBRIDGE_NN_OPTIM_H_
#define MELBRIDGE_NN_OPTIM_H_

#include <string>

#include "melbridge/nn/unet.h"

namespace melbridge::nn {

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

// AdamW with decoupled weight decay:
//   p <- p - lr * wd * p
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// with bias-corrected moments. State is keyed by parameter name.
template <typename T>
class AdamW {
 public:
  explicit AdamW(AdamWOptions options = {}) : options_(options) {}

  // Updates every entry of `params` that has a gradient. If any gradient is
  // non-finite nothing changes, the step counter does not advance and
  // false is returned; `bad_name` then names the first offender.
  bool Step(ParameterMap<T>& params, const ParameterMap<T>& grads, double lr,
            std::string* bad_name = nullptr);

  long step_count() const { return step_; }
  const AdamWOptions& options() const { return options_; }

 private:
  AdamWOptions options_;
  long step_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

// initial * 0.5^floor(epoch / halving_period), epochs counted from 0.
double StepDecayLearningRate(int epoch, double initial = 1e-3, int halving_period = 50);

}  // namespace melbridge::nn

#endif  // MELBRIDGE_NN_OPTIM_H_
