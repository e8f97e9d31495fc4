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

#ifndef MELBRIDGE_NN_WEIGHTS_IO_H_
#define MELBRIDGE_NN_WEIGHTS_IO_H_

#include <cstdint>
#include <string>

#include "melbridge/nn/unet.h"

namespace melbridge::nn {

// UAW1 weights file, little-endian:
//   "UAW1", u32 version,
//   u32 levels, u32 base_channels, u32 n_mels, u32 feature_dim,
//   u32 tensor count, then per tensor in name order:
//     u32 name length, name bytes, u32 rank, u32 dims[rank],
//     float32 data[prod(dims)].
inline constexpr std::uint32_t kWeightsFileVersion = 1;

std::string EncodeWeights(const UNetWeights<float>& w);
// Validates the result against its channel plan (InvalidInput) after the
// structural checks (IoError).
UNetWeights<float> DecodeWeights(const std::string& bytes);
void WriteWeights(const UNetWeights<float>& w, const std::string& path);
UNetWeights<float> ReadWeights(const std::string& path);

}  // namespace melbridge::nn

#endif  // MELBRIDGE_NN_WEIGHTS_IO_H_
