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

#ifndef MELBRIDGE_METRICS_H_
#define MELBRIDGE_METRICS_H_

#include <optional>
#include <vector>

#include "melbridge/audio.h"
#include "melbridge/config.h"
#include "melbridge/stft.h"

namespace melbridge {

// Analysis settings for cepstra: 1024-point frames every 256 samples with
// 384 samples of zero padding each side, 80 Slaney mels over 0 .. sr/2,
// natural log of amplitude with the 1e-5 floor, no peak normalization.
MelConfig CepstralAnalysisConfig(int sample_rate);

inline constexpr int kCepstralOrder = 13;

// frames x order: orthonormal DCT-II of each log-mel frame, coefficients
// 1..order (c0 dropped). Throws InvalidInput for an empty waveform.
RowMatrix MelCepstra(const Waveform& w, int order = kCepstralOrder);

// (10 / ln 10) * sqrt(2) * mean over frames of ||c_a - c_b||, over the
// common leading frames. Throws InvalidInput if the rates differ or there is
// no common frame.
double MelCepstralDistortion(const Waveform& a, const Waveform& b);

// Number of frames MelCepstralDistortion compares.
int CommonCepstralFrames(const Waveform& a, const Waveform& b);

struct F0Track {
  std::vector<double> f0;  // Hz, 0 when unvoiced
  std::vector<bool> voiced;
  int hop = 0;  // samples
};

struct YinOptions {
  double window_seconds = 0.025;
  double hop_seconds = 0.010;
  double threshold = 0.15;
  double min_hz = 50.0;
  double max_hz = 600.0;
  // Frames quieter than this mean square are unvoiced.
  double silence_power = 1e-8;
};

// YIN: cumulative-mean-normalized difference function, first dip under the
// threshold followed to its local minimum, parabolic refinement. Only frames
// whose window plus the longest lag fits inside the signal are analysed.
F0Track EstimateF0(const Waveform& w, const YinOptions& options = {});

// RMSE in Hz over frames voiced in both tracks (compared over the common
// length); nullopt when no frame is voiced in both.
std::optional<double> F0Rmse(const F0Track& a, const F0Track& b);

// Percentage of common frames whose voicing flags disagree. Throws
// InvalidInput when there are no common frames.
double VuvErrorPercent(const F0Track& a, const F0Track& b);

}  // namespace melbridge

#endif  // MELBRIDGE_METRICS_H_
