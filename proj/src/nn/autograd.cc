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

#include "melbridge/nn/autograd.h"

#include <sstream>
#include <stdexcept>
#include <utility>

#include "melbridge/errors.h"

namespace melbridge::nn {

std::size_t NumElements(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

std::string ShapeString(const std::vector<int>& shape) {
  std::ostringstream s;
  s << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s << (i ? "," : "") << shape[i];
  s << "]";
  return s.str();
}

template <typename T>
Tensor<T>::Tensor(std::vector<int> s, T fill)
    : shape(std::move(s)), data(NumElements(shape), fill) {}

template <typename T>
typename Tape<T>::Id Tape<T>::Constant(Tensor<T> value) {
  nodes_.push_back({std::move(value), std::nullopt, nullptr, false, {}});
  return size() - 1;
}

template <typename T>
typename Tape<T>::Id Tape<T>::Variable(Tensor<T> value) {
  nodes_.push_back({std::move(value), std::nullopt, nullptr, true, {}});
  return size() - 1;
}

template <typename T>
typename Tape<T>::Id Tape<T>::Parameter(const std::string& name, Tensor<T> value) {
  nodes_.push_back({std::move(value), std::nullopt, nullptr, true, name});
  return size() - 1;
}

template <typename T>
typename Tape<T>::Id Tape<T>::Record(Tensor<T> value, const std::vector<Id>& inputs,
                                     BackwardFn backward) {
  bool needs = false;
  for (Id i : inputs) needs = needs || nodes_[i].requires_grad;
  nodes_.push_back({std::move(value), std::nullopt,
                    needs ? std::move(backward) : nullptr, needs, {}});
  ++recorded_ops_;
  return size() - 1;
}

template <typename T>
Tensor<T>& Tape<T>::grad(Id id) {
  Node& n = nodes_[id];
  if (!n.grad) n.grad.emplace(n.value.shape, T(0));
  return *n.grad;
}

template <typename T>
const Tensor<T>* Tape<T>::grad_or_null(Id id) const {
  const Node& n = nodes_[id];
  return n.grad ? &*n.grad : nullptr;
}

template <typename T>
void Tape<T>::Backward(Id output) {
  if (value(output).size() != 1) {
    throw InvalidInput("Backward: output has " +
                       ShapeString(value(output).shape) +
                       " elements; pass an explicit seed");
  }
  Backward(output, Tensor<T>(value(output).shape, T(1)));
}

template <typename T>
void Tape<T>::Backward(Id output, const Tensor<T>& seed) {
  if (recorded_ops_ == 0) {
    throw std::logic_error("Backward: no recorded forward pass on this tape");
  }
  if (seed.shape != value(output).shape) {
    throw InvalidInput("Backward: seed shape " + ShapeString(seed.shape) +
                       " does not match output " + ShapeString(value(output).shape));
  }
  Tensor<T>& g = grad(output);
  for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += seed.data[i];
  for (Id id = output; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.backward && n.grad) n.backward(*this);
  }
}

template <typename T>
std::map<std::string, Tensor<T>> Tape<T>::ParameterGradients() const {
  std::map<std::string, Tensor<T>> out;
  for (const Node& n : nodes_) {
    if (n.param_name.empty()) continue;
    out[n.param_name] = n.grad ? *n.grad : Tensor<T>(n.value.shape, T(0));
  }
  return out;
}

template struct Tensor<float>;
template struct Tensor<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace melbridge::nn
