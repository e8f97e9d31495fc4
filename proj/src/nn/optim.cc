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

#include "melbridge/errors.h"

namespace melbridge::nn {

template <typename T>
bool AdamW<T>::Step(ParameterMap<T>& params, const ParameterMap<T>& grads, double lr,
                    std::string* bad_name) {
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    if (it == params.end()) throw InvalidInput("AdamW: gradient for unknown parameter " + name);
    if (it->second.shape != g.shape) {
      throw InvalidInput("AdamW: gradient shape mismatch for " + name);
    }
    for (T v : g.data) {
      if (!std::isfinite(static_cast<double>(v))) {
        if (bad_name) *bad_name = name;
        return false;
      }
    }
  }
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (const auto& [name, g] : grads) {
    Tensor<T>& p = params.at(name);
    std::vector<double>& m = m_[name];
    std::vector<double>& v = v_[name];
    m.resize(p.size(), 0.0);
    v.resize(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g.data[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      double x = p.data[i];
      x -= lr * options_.weight_decay * x;
      x -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + options_.epsilon);
      p.data[i] = static_cast<T>(x);
    }
  }
  return true;
}

double StepDecayLearningRate(int epoch, double initial, int halving_period) {
  if (epoch < 0 || halving_period <= 0) {
    throw InvalidInput("learning rate schedule: epoch must be >= 0 and period > 0");
  }
  return initial * std::pow(0.5, epoch / halving_period);
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace melbridge::nn
