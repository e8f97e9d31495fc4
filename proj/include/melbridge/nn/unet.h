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

#ifndef MELBRIDGE_NN_UNET_H_
#define MELBRIDGE_NN_UNET_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "melbridge/config.h"
#include "melbridge/mel.h"
#include "melbridge/nn/autograd.h"

namespace melbridge::nn {

// Channel plan. Level i runs at base_channels << i; there are `levels`
// encoder blocks, each followed by a 2x2 max-pool, and as many decoder
// blocks.
struct UNetSpec {
  int levels = 4;
  int base_channels = 32;
  int n_mels = 80;
  int feature_dim = kConfigFeatureDim;

  int Channels(int level) const { return base_channels << level; }
  // Frames and mels are padded to a multiple of this.
  int Granularity() const { return 1 << levels; }

  bool operator==(const UNetSpec&) const = default;
};

void ValidateSpec(const UNetSpec& spec);

template <typename T>
using ParameterMap = std::map<std::string, Tensor<T>>;

// Named tensors:
//   in.{weight,bias}                 input projection, 3x3, 1 -> C0
//   enc<i>.*, dec<i>.*               adaptive conv blocks:
//     conv.{weight,bias}             3x3 convolution
//     bn.{gamma,beta,running_mean,running_var}
//     film.{w_hyper,w_const}         W = w_hyper * C + w_const (C*C entries)
//     film.{b_hyper,b_const}         b = b_hyper * C + b_const
//     film.slope                     PReLU slope
//   up<i>.{weight,bias}              2x2 stride-2 transposed conv into level i
//   out.{weight,bias}                output projection, 1x1, C0 -> 1
template <typename T>
struct UNetWeights {
  UNetSpec spec;
  ParameterMap<T> tensors;
};

// Every tensor name with its shape, in map order.
std::vector<std::pair<std::string, std::vector<int>>> ExpectedShapes(const UNetSpec& spec);

// Running statistics are updated by the forward pass, not the optimizer.
bool IsTrainable(const std::string& name);

// He-uniform convolution kernels, zero biases, unit batch norm, PReLU slope
// 0.25, FiLM constants at identity, hypernetworks U(-0.01, 0.01) and a
// zeroed output projection, so a fresh network is the identity map.
template <typename T>
UNetWeights<T> InitUNetWeights(const UNetSpec& spec, std::uint64_t seed);

// Throws InvalidInput on missing, extra or misshapen tensors, non-finite
// values or non-positive running variance.
template <typename T>
void ValidateWeights(const UNetWeights<T>& w);

enum class Mode { kTrain, kEval };

struct FilmIds {
  int w_hyper, w_const, b_hyper, b_const, slope;
};

// features [N,D]. out = PReLU(W(C) x + b(C)) with W acting on channels.
template <typename T>
int FilmApply(Tape<T>& tape, int x, int features, const FilmIds& film);

// Parameter ids of one block registered on the tape.
struct ConvBlockIds {
  int conv_weight, conv_bias, gamma, beta;
  FilmIds film;
};

// Registers the block's trainable tensors under `prefix` ("enc0", ...).
template <typename T>
ConvBlockIds RegisterConvBlock(Tape<T>& tape, const UNetWeights<T>& weights,
                               const std::string& prefix);

// conv 3x3 -> batch norm -> FiLM (PReLU). Running statistics come from
// `weights` under `prefix`; in training the updated ones land in
// `running_updates` when given.
template <typename T>
int ConvBlockForward(Tape<T>& tape, int x, int features, const ConvBlockIds& ids,
                     const UNetWeights<T>& weights, const std::string& prefix,
                     Mode mode, ParameterMap<T>* running_updates);

// Records the whole network. input [N,1,F,M] in the normalizing base,
// features [N,D]. Frames and mels that are not multiples of Granularity()
// are edge-padded and the output cropped back. Output = input + correction.
template <typename T>
int UNetForward(Tape<T>& tape, int input, int features, const UNetWeights<T>& weights,
                Mode mode, ParameterMap<T>* running_updates = nullptr);

// Eval-mode inference on one base-space mel (frames x n_mels).
RowMatrix RunUNet(const UNetWeights<float>& weights, const RowMatrix& base_mel,
                  const ConfigFeatureVector& features);

// The learned correction for a Stage-1 output: to the base, through the
// network conditioned on the mel's own config, back to the config's space.
MelSpectrogram Adapt(const MelSpectrogram& stage1_output,
                     const UNetWeights<float>& weights);

}  // namespace melbridge::nn

#endif  // MELBRIDGE_NN_UNET_H_
