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

#ifndef MELBRIDGE_NORMALIZER_H_
#define MELBRIDGE_NORMALIZER_H_

#include "melbridge/config.h"
#include "melbridge/mel.h"

namespace melbridge {

// Closed-form maps between value spaces of the normalizable parameters.
// All maps are strictly increasing; values that sit on a clipped endpoint of
// a normalized space map to that endpoint and nothing more is recovered.

// One value from the space described by `p` into the normalizing base
// (natural-log amplitude). Throws InvalidInput for normalized values
// outside [0, 1].
double ValueToBase(double v, const NormalizableParams& p);
// Inverse of ValueToBase (clips into [0, 1] for normalized targets).
double BaseToValue(double x, const NormalizableParams& p);

// Maps m into the normalizing base. m must be in its config's own space or
// already in the base (then it is returned unchanged). The result keeps
// m.config and is tagged with kBaseValueSpace.
MelSpectrogram ToBase(const MelSpectrogram& m);

// Leaves the base for `target`. The result's config carries `target` as its
// normalizable half.
MelSpectrogram FromBase(const MelSpectrogram& m_base,
                        const NormalizableParams& target);

// FromBase(ToBase(m read as src), tgt).
MelSpectrogram ConvertNormalizable(const MelSpectrogram& m,
                                   const NormalizableParams& src,
                                   const NormalizableParams& tgt);

}  // namespace melbridge

#endif  // MELBRIDGE_NORMALIZER_H_
