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

#include "melbridge/nn/weights_io.h"

#include "binary_io.h"
#include "melbridge/errors.h"

namespace melbridge::nn {

namespace {

constexpr char kMagic[4] = {'U', 'A', 'W', '1'};
// Guards allocation when reading corrupt headers.
constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint32_t kMaxNameLength = 1024;

}  // namespace

std::string EncodeWeights(const UNetWeights<float>& w) {
  using internal::PutU32;
  ValidateWeights(w);
  std::string out(kMagic, 4);
  PutU32(out, kWeightsFileVersion);
  PutU32(out, static_cast<std::uint32_t>(w.spec.levels));
  PutU32(out, static_cast<std::uint32_t>(w.spec.base_channels));
  PutU32(out, static_cast<std::uint32_t>(w.spec.n_mels));
  PutU32(out, static_cast<std::uint32_t>(w.spec.feature_dim));
  PutU32(out, static_cast<std::uint32_t>(w.tensors.size()));
  for (const auto& [name, t] : w.tensors) {
    PutU32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    PutU32(out, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.shape) PutU32(out, static_cast<std::uint32_t>(d));
    for (float v : t.data) internal::PutF32(out, v);
  }
  return out;
}

UNetWeights<float> DecodeWeights(const std::string& bytes) {
  internal::ByteReader r(bytes, "UAW1");
  if (r.Bytes(4) != std::string_view(kMagic, 4)) throw IoError("UAW1: bad magic");
  const auto version = r.Get<std::uint32_t>();
  if (version != kWeightsFileVersion) {
    throw IoError("UAW1: unsupported version " + std::to_string(version));
  }
  UNetWeights<float> w;
  w.spec.levels = static_cast<int>(r.Get<std::uint32_t>());
  w.spec.base_channels = static_cast<int>(r.Get<std::uint32_t>());
  w.spec.n_mels = static_cast<int>(r.Get<std::uint32_t>());
  w.spec.feature_dim = static_cast<int>(r.Get<std::uint32_t>());
  const auto count = r.Get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = r.Get<std::uint32_t>();
    if (len == 0 || len > kMaxNameLength) throw IoError("UAW1: bad tensor name length");
    std::string name(r.Bytes(len));
    const auto rank = r.Get<std::uint32_t>();
    if (rank == 0 || rank > kMaxRank) throw IoError("UAW1: bad rank for " + name);
    Tensor<float> t;
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const auto d = r.Get<std::uint32_t>();
      if (d == 0 || d > (1u << 24)) throw IoError("UAW1: bad dimension for " + name);
      t.shape.push_back(static_cast<int>(d));
      n *= d;
    }
    if (n * 4 > r.remaining()) throw IoError("UAW1: truncated tensor " + name);
    t.data.resize(n);
    for (float& v : t.data) v = r.Get<float>();
    if (!w.tensors.emplace(std::move(name), std::move(t)).second) {
      throw IoError("UAW1: duplicate tensor");
    }
  }
  if (r.remaining() != 0) throw IoError("UAW1: trailing bytes");
  ValidateWeights(w);
  return w;
}

void WriteWeights(const UNetWeights<float>& w, const std::string& path) {
  internal::WriteFileBytes(path, EncodeWeights(w));
}

UNetWeights<float> ReadWeights(const std::string& path) {
  return DecodeWeights(internal::ReadFileBytes(path));
}

}  // namespace melbridge::nn
