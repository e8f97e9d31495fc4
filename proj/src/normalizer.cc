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

#include "melbridge/normalizer.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "melbridge/errors.h"

namespace melbridge {

namespace {

MelConfig WithNormalizable(const MelConfig& cfg, const NormalizableParams& b) {
  ConfigParts parts = SplitConfig(cfg);
  parts.normalizable = b;
  return CombineConfig(parts);
}

}  // namespace

double ValueToBase(double v, const NormalizableParams& p) {
  if (!p.amp_to_db) return std::log(std::max(v, kAmplitudeFloor));
  double db = v;
  if (p.normalize_mel) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidInput("normalized mel value " + std::to_string(v) +
                         " outside [0, 1]");
    }
    db = v * -p.min_level_db + p.min_level_db + p.ref_level_db;
  }
  return p.log_base == LogBase::kTen ? db / p.log_factor * M_LN10
                                     : db / p.log_factor;
}

double BaseToValue(double x, const NormalizableParams& p) {
  if (!p.amp_to_db) return std::exp(x);
  const double db = p.log_base == LogBase::kTen ? x * p.log_factor / M_LN10
                                                : x * p.log_factor;
  if (!p.normalize_mel) return db;
  return std::clamp((db - p.ref_level_db - p.min_level_db) / -p.min_level_db,
                    0.0, 1.0);
}

MelSpectrogram ToBase(const MelSpectrogram& m) {
  if (m.space == kBaseValueSpace) return m;
  const NormalizableParams p = SplitConfig(m.config).normalizable;
  if (m.space != ValueSpaceFor(p)) {
    throw InvalidInput("ToBase: values are in " + ToString(m.space) +
                       " but the config declares " + ToString(ValueSpaceFor(p)));
  }
  MelSpectrogram out = m;
  out.space = kBaseValueSpace;
  for (double& v : out.values.reshaped()) v = ValueToBase(v, p);
  return out;
}

MelSpectrogram FromBase(const MelSpectrogram& m_base,
                        const NormalizableParams& target) {
  if (m_base.space != kBaseValueSpace) {
    throw InvalidInput("FromBase: input is in " + ToString(m_base.space) +
                       ", expected the normalizing base");
  }
  ValidateNormalizable(target);
  MelSpectrogram out = m_base;
  out.config = WithNormalizable(m_base.config, target);
  out.space = ValueSpaceFor(target);
  for (double& v : out.values.reshaped()) v = BaseToValue(v, target);
  return out;
}

MelSpectrogram ConvertNormalizable(const MelSpectrogram& m,
                                   const NormalizableParams& src,
                                   const NormalizableParams& tgt) {
  MelSpectrogram as_src = m;
  as_src.config = WithNormalizable(m.config, src);
  as_src.space = ValueSpaceFor(src);
  return FromBase(ToBase(as_src), tgt);
}

}  // namespace melbridge
