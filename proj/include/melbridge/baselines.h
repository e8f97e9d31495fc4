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

#ifndef MELBRIDGE_BASELINES_H_
#define MELBRIDGE_BASELINES_H_

#include "melbridge/config.h"
#include "melbridge/mel.h"
#include "melbridge/stage1.h"

namespace melbridge {

// Closed-form conversion that ignores the filterbank mismatch. The source
// mel (in its config's own space) is linearly interpolated along time so
// that frame j of the output sits at real time j * hop_tgt / sr_tgt, giving
// floor(frames * r) frames for r = (hop_src / sr_src) / (hop_tgt / sr_tgt),
// then its values are moved from the source's normalizable space to the
// target's. Equal configs give back m_src unchanged. Throws InvalidInput if
// the mel bin counts differ.
MelSpectrogram InterpolationBaseline(const MelSpectrogram& m_src,
                                     const MelConfig& cfg_tgt);

// Stage 1 alone.
MelSpectrogram GriffinOnlyBaseline(const MelSpectrogram& m_src,
                                   const MelConfig& cfg_tgt,
                                   const GriffinLimOptions& options = {});

}  // namespace melbridge

#endif  // MELBRIDGE_BASELINES_H_
