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

#include "melbridge/baselines.h"

#include <cmath>
#include <string>

#include "melbridge/errors.h"
#include "melbridge/normalizer.h"

namespace melbridge {

MelSpectrogram InterpolationBaseline(const MelSpectrogram& m_src, const MelConfig& cfg_tgt) {
  ValidateConfig(cfg_tgt);
  const MelConfig& cfg_src = m_src.config;
  if (m_src.n_mels() != cfg_tgt.n_mels) {
    throw InvalidInput("interpolation baseline: source has " + std::to_string(m_src.n_mels()) +
                       " mel bins, target config expects " + std::to_string(cfg_tgt.n_mels));
  }
  const NormalizableParams src_b = SplitConfig(cfg_src).normalizable;
  const NormalizableParams tgt_b = SplitConfig(cfg_tgt).normalizable;
  if (m_src.space != ValueSpaceFor(src_b)) {
    throw InvalidInput("interpolation baseline: source mel must be in its config's own space");
  }

  MelSpectrogram out = m_src;
  const double src_period = static_cast<double>(cfg_src.hop_length) / cfg_src.sample_rate;
  const double tgt_period = static_cast<double>(cfg_tgt.hop_length) / cfg_tgt.sample_rate;
  const int n = m_src.frames();
  if (src_period != tgt_period && n > 0) {
    const double r = src_period / tgt_period;
    const int frames = static_cast<int>(std::floor(n * r));
    out.values.resize(frames, m_src.n_mels());
    for (int j = 0; j < frames; ++j) {
      const double pos = j * tgt_period / src_period;
      const int i0 = std::min(static_cast<int>(std::floor(pos)), n - 1);
      const int i1 = std::min(i0 + 1, n - 1);
      const double frac = pos - i0;
      out.values.row(j) = (1.0 - frac) * m_src.values.row(i0) + frac * m_src.values.row(i1);
    }
  }
  if (!(src_b == tgt_b)) out = ConvertNormalizable(out, src_b, tgt_b);
  out.config = cfg_tgt;
  out.space = ValueSpaceFor(tgt_b);
  return out;
}

MelSpectrogram GriffinOnlyBaseline(const MelSpectrogram& m_src, const MelConfig& cfg_tgt,
                                   const GriffinLimOptions& options) {
  return ApproximateConvert(m_src, cfg_tgt, options);
}

}  // namespace melbridge
