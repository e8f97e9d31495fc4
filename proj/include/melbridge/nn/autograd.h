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

#ifndef MELBRIDGE_NN_AUTOGRAD_H_
#define MELBRIDGE_NN_AUTOGRAD_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace melbridge::nn {

// Dense row-major tensor. Feature maps are NCHW; for mel input H is frames
// and W is mel bins.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, T fill = T(0));

  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[i]; }
  std::size_t size() const { return data.size(); }
  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  bool operator==(const Tensor&) const = default;
};

std::size_t NumElements(const std::vector<int>& shape);
std::string ShapeString(const std::vector<int>& shape);

template <typename To, typename From>
Tensor<To> CastTensor(const Tensor<From>& t) {
  Tensor<To> out;
  out.shape = t.shape;
  out.data.assign(t.data.begin(), t.data.end());
  return out;
}

// Reverse-mode tape. Every node keeps its forward value; nodes that depend
// on a parameter or variable also get a gradient buffer and a backward
// closure that pushes its gradient into its inputs. Backward visits nodes
// in reverse recording order.
template <typename T>
class Tape {
 public:
  using Id = int;
  using BackwardFn = std::function<void(Tape&)>;

  // Leaf without gradient.
  Id Constant(Tensor<T> value);
  // Leaf with gradient (e.g. the input of a Jacobian check).
  Id Variable(Tensor<T> value);
  // Named leaf with gradient; collected by ParameterGradients.
  Id Parameter(const std::string& name, Tensor<T> value);

  // Records an op result. `backward` runs only if some input needs a
  // gradient; it reads grad(self) and accumulates into its inputs' grads.
  Id Record(Tensor<T> value, const std::vector<Id>& inputs, BackwardFn backward);

  const Tensor<T>& value(Id id) const { return nodes_[id].value; }
  bool requires_grad(Id id) const { return nodes_[id].requires_grad; }
  // Zero-initialized on first access.
  Tensor<T>& grad(Id id);
  const Tensor<T>* grad_or_null(Id id) const;

  // Seeds d(output)/d(output) = 1 for a one-element output.
  void Backward(Id output);
  void Backward(Id output, const Tensor<T>& seed);

  // Gradients of every Parameter by name (zeros where nothing flowed).
  std::map<std::string, Tensor<T>> ParameterGradients() const;

  int size() const { return static_cast<int>(nodes_.size()); }

  // Piecewise ops (PReLU, max-pool) fold every branch decision into this
  // hash. Two forward passes with equal signatures ran through the same
  // linear region, which lets finite-difference checks tell kinks from
  // errors.
  void NoteBranch(std::uint64_t decision) {
    branch_signature_ = (branch_signature_ ^ decision) * 0x100000001b3ULL;
  }
  std::uint64_t branch_signature() const { return branch_signature_; }

 private:
  struct Node {
    Tensor<T> value;
    std::optional<Tensor<T>> grad;
    BackwardFn backward;
    bool requires_grad = false;
    std::string param_name;
  };
  std::vector<Node> nodes_;
  int recorded_ops_ = 0;
  std::uint64_t branch_signature_ = 0xcbf29ce484222325ULL;
};

}  // namespace melbridge::nn

#endif  // MELBRIDGE_NN_AUTOGRAD_H_
