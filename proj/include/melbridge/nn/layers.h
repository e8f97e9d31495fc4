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

#ifndef MELBRIDGE_NN_LAYERS_H_
#define MELBRIDGE_NN_LAYERS_H_

#include "melbridge/nn/autograd.h"

namespace melbridge::nn {

// Differentiable ops recorded on a Tape. Shapes are checked; mismatches
// throw InvalidInput.

// x [N,I,H,W], w [O,I,k,k] with odd k, b [O]; stride 1, zero padding k/2.
template <typename T>
int Conv2d(Tape<T>& tape, int x, int w, int b);

// x [N,I,H,W], w [I,O,2,2], b [O] -> [N,O,2H,2W]; kernel 2, stride 2.
template <typename T>
int ConvTranspose2x2(Tape<T>& tape, int x, int w, int b);

// [N,C,H,W] -> [N,C,H/2,W/2]; H and W must be even. Ties go to the first
// element in row-major window order.
template <typename T>
int MaxPool2x2(Tape<T>& tape, int x);

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

// Per-channel batch norm over N, H and W. In training the batch statistics
// are used and, when `new_mean`/`new_var` are given, the updated running
// statistics (momentum 0.1, unbiased variance) are written there. In eval
// the running statistics are used.
template <typename T>
int BatchNorm2d(Tape<T>& tape, int x, int gamma, int beta,
                const Tensor<T>& running_mean, const Tensor<T>& running_var,
                bool training, Tensor<T>* new_mean = nullptr,
                Tensor<T>* new_var = nullptr);

// features [N,D], weight [K,D], bias [K] -> [N,K].
template <typename T>
int Affine(Tape<T>& tape, int features, int weight, int bias);

// Per-sample channel mixing: x [N,C,H,W], mix [N,C*C] (row-major C x C),
// shift [N,C]. out[n,:,h,w] = mix_n * x[n,:,h,w] + shift_n.
template <typename T>
int ChannelMix(Tape<T>& tape, int x, int mix, int shift);

// max(x,0) + slope * min(x,0) with a single learned slope [1].
template <typename T>
int PRelu(Tape<T>& tape, int x, int slope);

template <typename T>
int Add(Tape<T>& tape, int a, int b);

// Pads the last two axes of [N,C,H,W] to (h, w) by repeating the last row
// and column.
template <typename T>
int EdgePad2d(Tape<T>& tape, int x, int h, int w);

// Keeps the leading (h, w) block of the last two axes.
template <typename T>
int Crop2d(Tape<T>& tape, int x, int h, int w);

// Mean absolute difference against a constant target, optionally over the
// entries where mask is nonzero. The gradient uses sign(0) = 0.
template <typename T>
int L1Loss(Tape<T>& tape, int pred, const Tensor<T>& target,
           const Tensor<T>* mask = nullptr);

// sum(x * weights) for fixed weights.
template <typename T>
int WeightedSum(Tape<T>& tape, int x, const Tensor<T>& weights);

}  // namespace melbridge::nn

#endif  // MELBRIDGE_NN_LAYERS_H_
