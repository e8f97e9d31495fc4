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

#include "melbridge/nn/unet.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "melbridge/errors.h"
#include "melbridge/nn/layers.h"
#include "melbridge/normalizer.h"
#include "melbridge/random.h"

namespace melbridge::nn {

namespace {

std::string Level(const char* kind, int i) { return kind + std::to_string(i); }

void AddBlockShapes(std::vector<std::pair<std::string, std::vector<int>>>& out,
                    const std::string& p, int ci, int co, int d) {
  out.push_back({p + ".conv.weight", {co, ci, 3, 3}});
  out.push_back({p + ".conv.bias", {co}});
  out.push_back({p + ".bn.gamma", {co}});
  out.push_back({p + ".bn.beta", {co}});
  out.push_back({p + ".bn.running_mean", {co}});
  out.push_back({p + ".bn.running_var", {co}});
  out.push_back({p + ".film.w_hyper", {co * co, d}});
  out.push_back({p + ".film.w_const", {co * co}});
  out.push_back({p + ".film.b_hyper", {co, d}});
  out.push_back({p + ".film.b_const", {co}});
  out.push_back({p + ".film.slope", {1}});
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

template <typename T>
int Param(Tape<T>& tape, const UNetWeights<T>& w, const std::string& name) {
  return tape.Parameter(name, w.tensors.at(name));
}

}  // namespace

template <typename T>
ConvBlockIds RegisterConvBlock(Tape<T>& tape, const UNetWeights<T>& w, const std::string& p) {
  ConvBlockIds ids;
  ids.conv_weight = Param(tape, w, p + ".conv.weight");
  ids.conv_bias = Param(tape, w, p + ".conv.bias");
  ids.gamma = Param(tape, w, p + ".bn.gamma");
  ids.beta = Param(tape, w, p + ".bn.beta");
  ids.film.w_hyper = Param(tape, w, p + ".film.w_hyper");
  ids.film.w_const = Param(tape, w, p + ".film.w_const");
  ids.film.b_hyper = Param(tape, w, p + ".film.b_hyper");
  ids.film.b_const = Param(tape, w, p + ".film.b_const");
  ids.film.slope = Param(tape, w, p + ".film.slope");
  return ids;
}

namespace {

int RoundUp(int x, int m) { return (x + m - 1) / m * m; }

}  // namespace

void ValidateSpec(const UNetSpec& spec) {
  if (spec.levels < 1 || spec.levels > 8) {
    throw InvalidInput("UNetSpec: levels must be in [1, 8]");
  }
  if (spec.base_channels < 1 || spec.Channels(spec.levels - 1) > 4096) {
    throw InvalidInput("UNetSpec: base_channels must be positive and the widest level at most 4096");
  }
  if (spec.n_mels < 1) throw InvalidInput("UNetSpec: n_mels must be positive");
  if (spec.feature_dim != kConfigFeatureDim) {
    throw InvalidInput("UNetSpec: feature_dim must be " + std::to_string(kConfigFeatureDim));
  }
}

std::vector<std::pair<std::string, std::vector<int>>> ExpectedShapes(const UNetSpec& spec) {
  ValidateSpec(spec);
  std::vector<std::pair<std::string, std::vector<int>>> out;
  const int d = spec.feature_dim;
  const int c0 = spec.Channels(0);
  out.push_back({"in.weight", {c0, 1, 3, 3}});
  out.push_back({"in.bias", {c0}});
  for (int i = 0; i < spec.levels; ++i) {
    const int co = spec.Channels(i);
    AddBlockShapes(out, Level("enc", i), i == 0 ? c0 : spec.Channels(i - 1), co, d);
    AddBlockShapes(out, Level("dec", i), co, co, d);
    const int up_in = i == spec.levels - 1 ? co : spec.Channels(i + 1);
    out.push_back({Level("up", i) + ".weight", {up_in, co, 2, 2}});
    out.push_back({Level("up", i) + ".bias", {co}});
  }
  out.push_back({"out.weight", {1, c0, 1, 1}});
  out.push_back({"out.bias", {1}});
  std::sort(out.begin(), out.end());
  return out;
}

bool IsTrainable(const std::string& name) {
  return !EndsWith(name, ".running_mean") && !EndsWith(name, ".running_var");
}

template <typename T>
UNetWeights<T> InitUNetWeights(const UNetSpec& spec, std::uint64_t seed) {
  UNetWeights<T> w;
  w.spec = spec;
  std::mt19937_64 rng(DeriveSeed(seed, 0x756e6574));
  for (const auto& [name, shape] : ExpectedShapes(spec)) {
    Tensor<T> t(shape);
    if (EndsWith(name, "conv.weight") || name == "in.weight" ||
        (name.rfind("up", 0) == 0 && EndsWith(name, ".weight"))) {
      // Fan-in of a transposed conv output is its input channel count.
      const int fan_in = name.rfind("up", 0) == 0 ? shape[0] : shape[1] * shape[2] * shape[3];
      const double bound = std::sqrt(6.0 / fan_in);
      for (T& v : t.data) v = static_cast<T>(UniformRange(rng, -bound, bound));
    } else if (EndsWith(name, "bn.gamma") || EndsWith(name, "running_var")) {
      std::fill(t.data.begin(), t.data.end(), T(1));
    } else if (EndsWith(name, "film.w_hyper") || EndsWith(name, "film.b_hyper")) {
      for (T& v : t.data) v = static_cast<T>(UniformRange(rng, -0.01, 0.01));
    } else if (EndsWith(name, "film.w_const")) {
      const int c = static_cast<int>(std::lround(std::sqrt(static_cast<double>(shape[0]))));
      for (int i = 0; i < c; ++i) t.data[static_cast<std::size_t>(i) * c + i] = T(1);
    } else if (EndsWith(name, "film.slope")) {
      t.data[0] = T(0.25);
    }
    w.tensors.emplace(name, std::move(t));
  }
  return w;
}

template <typename T>
void ValidateWeights(const UNetWeights<T>& w) {
  const auto expected = ExpectedShapes(w.spec);
  if (expected.size() != w.tensors.size()) {
    throw InvalidInput("weights: expected " + std::to_string(expected.size()) +
                       " tensors for this channel plan, found " +
                       std::to_string(w.tensors.size()));
  }
  for (const auto& [name, shape] : expected) {
    auto it = w.tensors.find(name);
    if (it == w.tensors.end()) throw InvalidInput("weights: missing tensor " + name);
    if (it->second.shape != shape || it->second.size() != NumElements(shape)) {
      throw InvalidInput("weights: tensor " + name + " has shape " +
                         ShapeString(it->second.shape) + ", expected " + ShapeString(shape));
    }
    for (T v : it->second.data) {
      if (!std::isfinite(static_cast<double>(v))) {
        throw InvalidInput("weights: tensor " + name + " has non-finite values");
      }
      if (EndsWith(name, "running_var") && !(v > 0)) {
        throw InvalidInput("weights: tensor " + name + " must be positive");
      }
    }
  }
}

template <typename T>
int FilmApply(Tape<T>& tape, int x, int features, const FilmIds& film) {
  const int mix = Affine(tape, features, film.w_hyper, film.w_const);
  const int shift = Affine(tape, features, film.b_hyper, film.b_const);
  return PRelu(tape, ChannelMix(tape, x, mix, shift), film.slope);
}

template <typename T>
int ConvBlockForward(Tape<T>& tape, int x, int features, const ConvBlockIds& ids,
                     const UNetWeights<T>& weights, const std::string& prefix,
                     Mode mode, ParameterMap<T>* running_updates) {
  const int conv = Conv2d(tape, x, ids.conv_weight, ids.conv_bias);
  const std::string mean_name = prefix + ".bn.running_mean";
  const std::string var_name = prefix + ".bn.running_var";
  Tensor<T>* new_mean = nullptr;
  Tensor<T>* new_var = nullptr;
  if (running_updates && mode == Mode::kTrain) {
    new_mean = &(*running_updates)[mean_name];
    new_var = &(*running_updates)[var_name];
  }
  const int bn = BatchNorm2d(tape, conv, ids.gamma, ids.beta, weights.tensors.at(mean_name),
                             weights.tensors.at(var_name), mode == Mode::kTrain, new_mean,
                             new_var);
  return FilmApply(tape, bn, features, ids.film);
}

template <typename T>
int UNetForward(Tape<T>& tape, int input, int features, const UNetWeights<T>& weights,
                Mode mode, ParameterMap<T>* running_updates) {
  const UNetSpec& spec = weights.spec;
  const Tensor<T>& xv = tape.value(input);
  if (xv.rank() != 4 || xv.dim(1) != 1 || xv.dim(3) != spec.n_mels) {
    throw InvalidInput("UNetForward: input must be [N,1,frames," + std::to_string(spec.n_mels) +
                       "], got " + ShapeString(xv.shape));
  }
  const Tensor<T>& fv = tape.value(features);
  if (fv.shape != std::vector<int>{xv.dim(0), spec.feature_dim}) {
    throw InvalidInput("UNetForward: features must be [N," + std::to_string(spec.feature_dim) +
                       "], got " + ShapeString(fv.shape));
  }
  const int frames = xv.dim(2), mels = xv.dim(3);
  const int g = spec.Granularity();
  const int pf = RoundUp(frames, g), pm = RoundUp(mels, g);
  const bool padded = pf != frames || pm != mels;
  int h = padded ? EdgePad2d(tape, input, pf, pm) : input;

  h = Conv2d(tape, h, Param(tape, weights, "in.weight"), Param(tape, weights, "in.bias"));
  std::vector<int> skips;
  for (int i = 0; i < spec.levels; ++i) {
    const std::string p = Level("enc", i);
    h = ConvBlockForward(tape, h, features, RegisterConvBlock(tape, weights, p), weights, p, mode,
                         running_updates);
    skips.push_back(h);
    h = MaxPool2x2(tape, h);
  }
  for (int i = spec.levels - 1; i >= 0; --i) {
    const std::string up = Level("up", i);
    h = ConvTranspose2x2(tape, h, Param(tape, weights, up + ".weight"),
                         Param(tape, weights, up + ".bias"));
    h = Add(tape, h, skips[i]);
    const std::string p = Level("dec", i);
    h = ConvBlockForward(tape, h, features, RegisterConvBlock(tape, weights, p), weights, p, mode,
                         running_updates);
  }
  h = Conv2d(tape, h, Param(tape, weights, "out.weight"), Param(tape, weights, "out.bias"));
  if (padded) h = Crop2d(tape, h, frames, mels);
  return Add(tape, input, h);
}

RowMatrix RunUNet(const UNetWeights<float>& weights, const RowMatrix& base_mel,
                  const ConfigFeatureVector& features) {
  if (base_mel.cols() != weights.spec.n_mels) {
    throw InvalidInput("RunUNet: mel has " + std::to_string(base_mel.cols()) +
                       " bins but the weights expect " + std::to_string(weights.spec.n_mels));
  }
  if (base_mel.rows() == 0) return base_mel;
  const int frames = static_cast<int>(base_mel.rows()), mels = weights.spec.n_mels;
  Tensor<float> x({1, 1, frames, mels});
  for (Eigen::Index i = 0; i < base_mel.size(); ++i) {
    x.data[i] = static_cast<float>(base_mel.data()[i]);
  }
  Tensor<float> f({1, weights.spec.feature_dim});
  for (int i = 0; i < weights.spec.feature_dim; ++i) f.data[i] = static_cast<float>(features[i]);
  Tape<float> tape;
  const int in = tape.Constant(std::move(x));
  const int feat = tape.Constant(std::move(f));
  const Tensor<float>& y = tape.value(UNetForward(tape, in, feat, weights, Mode::kEval));
  RowMatrix out(frames, mels);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = y.data[i];
  return out;
}

MelSpectrogram Adapt(const MelSpectrogram& stage1_output, const UNetWeights<float>& weights) {
  const MelConfig& cfg = stage1_output.config;
  if (cfg.n_mels != weights.spec.n_mels) {
    throw InvalidInput("Adapt: config has n_mels " + std::to_string(cfg.n_mels) +
                       " but the weights were built for " +
                       std::to_string(weights.spec.n_mels));
  }
  MelSpectrogram base = ToBase(stage1_output);
  const ConfigParts parts = SplitConfig(cfg);
  base.values = RunUNet(weights, base.values, EncodeConfigFeatures(parts.non_normalizable));
  return FromBase(base, parts.normalizable);
}

#define MELBRIDGE_INSTANTIATE_UNET(T)                                                      \
  template UNetWeights<T> InitUNetWeights<T>(const UNetSpec&, std::uint64_t);              \
  template void ValidateWeights<T>(const UNetWeights<T>&);                                 \
  template ConvBlockIds RegisterConvBlock<T>(Tape<T>&, const UNetWeights<T>&,               \
                                             const std::string&);                          \
  template int FilmApply<T>(Tape<T>&, int, int, const FilmIds&);                           \
  template int ConvBlockForward<T>(Tape<T>&, int, int, const ConvBlockIds&,                \
                                   const UNetWeights<T>&, const std::string&, Mode,        \
                                   ParameterMap<T>*);                                      \
  template int UNetForward<T>(Tape<T>&, int, int, const UNetWeights<T>&, Mode,             \
                              ParameterMap<T>*);

MELBRIDGE_INSTANTIATE_UNET(float)
MELBRIDGE_INSTANTIATE_UNET(double)

#undef MELBRIDGE_INSTANTIATE_UNET

}  // namespace melbridge::nn
