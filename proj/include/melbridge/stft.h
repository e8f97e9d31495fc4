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

#ifndef MELBRIDGE_STFT_H_
#define MELBRIDGE_STFT_H_

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "melbridge/audio.h"
#include "melbridge/config.h"

namespace melbridge {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexRowMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic,
                                       Eigen::Dynamic, Eigen::RowMajor>;

// Framing parameters shared by analysis and synthesis.
struct StftGeometry {
  int n_fft = 1024;
  int win_length = 1024;
  int hop_length = 256;
  int left_pad = 0;
  int right_pad = 0;

  static StftGeometry FromConfig(const MelConfig& cfg);

  int NumBins() const { return n_fft / 2 + 1; }
  // floor((n + pads - n_fft) / hop) + 1, or 0 if shorter than one frame.
  int NumFrames(std::size_t num_samples) const;
  // Length Istft produces for `frames` frames: (frames-1)*hop + n_fft - pads.
  std::size_t SynthesisLength(int frames) const;

  bool operator==(const StftGeometry&) const = default;
};

// Periodic Hann, w[n] = 0.5 - 0.5 cos(2 pi n / N). N = 1 gives {1}.
std::vector<double> HannWindow(int win_length);

// The analysis window zero-padded (centered) to n_fft.
std::vector<double> PaddedWindow(const StftGeometry& g);

struct ComplexSpectrogram {
  ComplexRowMatrix bins;  // frames x (n_fft/2 + 1)
  StftGeometry geometry;
  int sample_rate = 22050;

  int frames() const { return static_cast<int>(bins.rows()); }
};

struct LinearSpectrogram {
  RowMatrix magnitudes;  // frames x (n_fft/2 + 1), non-negative
  StftGeometry geometry;
  int sample_rate = 22050;

  int frames() const { return static_cast<int>(magnitudes.rows()); }
};

// Zero-pads by left_pad/right_pad, frames with hop_length, windows with the
// padded Hann window and takes the one-sided DFT of each frame. Throws
// InvalidInput if the padded signal is shorter than one frame.
ComplexSpectrogram Stft(const Waveform& w, const StftGeometry& g);

LinearSpectrogram Magnitude(const ComplexSpectrogram& spec);

// Least-squares inverse: windowed overlap-add divided by the overlapped
// squared window, then the pads are cut off. Samples whose squared-window
// sum falls under kWindowSumFloor times its maximum are divided by that
// floor instead. With 75% overlap this touches only the outer fifth of an
// unpadded signal's first and last frame, where a lone window edge would
// otherwise amplify inconsistent frames without bound. Throws InvalidInput
// when the bin count disagrees with the geometry.
Waveform Istft(const ComplexSpectrogram& spec);

inline constexpr double kWindowSumFloor = 1e-1;

}  // namespace melbridge

#endif  // MELBRIDGE_STFT_H_
