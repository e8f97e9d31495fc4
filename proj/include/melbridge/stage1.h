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

#ifndef MELBRIDGE_STAGE1_H_
#define MELBRIDGE_STAGE1_H_

#include <functional>
#include <vector>

#include "melbridge/audio.h"
#include "melbridge/config.h"
#include "melbridge/mel.h"
#include "melbridge/stft.h"

namespace melbridge {

// Moore-Penrose inverse of the filterbank (bins x n_mels) from its SVD,
// discarding singular values below 1e-8 of the largest. Throws InvalidInput
// if fewer than n_mels values survive.
RowMatrix PseudoInverse(const MelFilterbank& fb);

// Same as PseudoInverse, memoized per filterbank geometry.
const RowMatrix& CachedPseudoInverse(const MelConfig& cfg);

// Least-squares linear spectrogram for a linear-amplitude mel spectrogram:
// pinv(fb) * mel per frame, negatives clamped to zero.
LinearSpectrogram MelToLinear(const RowMatrix& mel_amplitude,
                              const RowMatrix& pinv,
                              const StftGeometry& geometry, int sample_rate);

// Phase retrieval by alternating projections, starting from zero phase.
class GriffinLimState {
 public:
  explicit GriffinLimState(LinearSpectrogram target);

  // One iteration: synthesize with the current phases, re-analyse, record
  // the consistency of that signal, keep its phases.
  void Step();

  // Waveform for the current phase estimate.
  Waveform CurrentWaveform() const;

  int iteration() const { return iteration_; }
  const LinearSpectrogram& target() const { return target_; }
  // consistency()[k] belongs to the signal synthesized in iteration k+1.
  const std::vector<double>& consistency() const { return consistency_; }

 private:
  ComplexSpectrogram Current() const;

  const LinearSpectrogram target_;
  RowMatrix phases_;
  int iteration_ = 0;
  std::vector<double> consistency_;
};

// || |S| - M || / || M || with one-sided bins weighted by how often they
// occur in the full spectrum (DC and Nyquist once, the rest twice), which
// makes it the Frobenius distance on the two-sided spectrum.
double SpectralInconsistency(const RowMatrix& magnitudes,
                             const RowMatrix& target, int n_fft);

inline constexpr int kGriffinLimIterations = 32;

struct GriffinLimOptions {
  int iterations = kGriffinLimIterations;
  // Called after every iteration with (iteration, consistency). Returning
  // false stops early.
  std::function<bool(int, double)> progress;
};

struct GriffinLimResult {
  Waveform waveform;
  std::vector<double> consistency;
  int iterations_run = 0;
  bool cancelled = false;
};

// All-zero magnitudes short-circuit to a silent waveform with no iterations.
GriffinLimResult GriffinLim(const LinearSpectrogram& spec,
                            const GriffinLimOptions& options = {});

// Mel spectrogram (in its config's space or the base) to the intermediate
// waveform: back to linear amplitude (floor values become zero), pseudo
// inverse, Griffin-Lim, then hop/2 trailing zeros so the length centers on
// the range of source lengths that produce this frame count. Rate is the
// source config's.
Waveform IntermediateWaveform(const MelSpectrogram& m_src,
                              const GriffinLimOptions& options = {});

// Stage 1: IntermediateWaveform, resampled to cfg_tgt's rate if needed,
// then re-extracted under cfg_tgt.
MelSpectrogram ApproximateConvert(const MelSpectrogram& m_src,
                                  const MelConfig& cfg_tgt,
                                  const GriffinLimOptions& options = {});

}  // namespace melbridge

#endif  // MELBRIDGE_STAGE1_H_
