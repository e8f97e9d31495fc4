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

#include "melbridge/stft.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.h"
#include "melbridge/errors.h"

namespace melbridge {

StftGeometry StftGeometry::FromConfig(const MelConfig& cfg) {
  return {cfg.n_fft, cfg.win_length, cfg.hop_length, cfg.left_pad,
          cfg.right_pad};
}

int StftGeometry::NumFrames(std::size_t num_samples) const {
  const long padded = static_cast<long>(num_samples) + left_pad + right_pad;
  if (padded < n_fft) return 0;
  return static_cast<int>((padded - n_fft) / hop_length + 1);
}

std::size_t StftGeometry::SynthesisLength(int frames) const {
  if (frames <= 0) return 0;
  const long len = static_cast<long>(frames - 1) * hop_length + n_fft -
                   left_pad - right_pad;
  return len > 0 ? static_cast<std::size_t>(len) : 0;
}

std::vector<double> HannWindow(int win_length) {
  if (win_length < 1) throw InvalidInput("HannWindow: win_length must be >= 1");
  if (win_length == 1) return {1.0};
  std::vector<double> w(win_length);
  for (int n = 0; n < win_length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / win_length);
  }
  return w;
}

std::vector<double> PaddedWindow(const StftGeometry& g) {
  std::vector<double> out(g.n_fft, 0.0);
  const auto w = HannWindow(g.win_length);
  const int offset = (g.n_fft - g.win_length) / 2;
  std::copy(w.begin(), w.end(), out.begin() + offset);
  return out;
}

ComplexSpectrogram Stft(const Waveform& w, const StftGeometry& g) {
  if (w.empty()) throw InvalidInput("Stft: empty waveform");
  const int frames = g.NumFrames(w.size());
  if (frames < 1) {
    throw InvalidInput("Stft: waveform of " + std::to_string(w.size()) +
                       " samples is shorter than one frame of " +
                       std::to_string(g.n_fft));
  }
  const auto window = PaddedWindow(g);
  const long n = static_cast<long>(w.size());

  ComplexSpectrogram out;
  out.geometry = g;
  out.sample_rate = w.sample_rate;
  out.bins.resize(frames, g.NumBins());

  internal::RealFft fft(g.n_fft);
  double* buf = fft.time();
  for (int f = 0; f < frames; ++f) {
    // Index into the unpadded signal of the frame's first sample.
    const long start = static_cast<long>(f) * g.hop_length - g.left_pad;
    for (int k = 0; k < g.n_fft; ++k) {
      const long idx = start + k;
      buf[k] = (idx >= 0 && idx < n) ? w.samples[idx] * window[k] : 0.0;
    }
    fft.Forward();
    std::copy(fft.freq(), fft.freq() + g.NumBins(), out.bins.row(f).data());
  }
  return out;
}

LinearSpectrogram Magnitude(const ComplexSpectrogram& spec) {
  LinearSpectrogram out;
  out.geometry = spec.geometry;
  out.sample_rate = spec.sample_rate;
  out.magnitudes = spec.bins.cwiseAbs();
  return out;
}

Waveform Istft(const ComplexSpectrogram& spec) {
  const StftGeometry& g = spec.geometry;
  if (spec.bins.cols() != g.NumBins()) {
    throw InvalidInput("Istft: spectrogram has " +
                       std::to_string(spec.bins.cols()) + " bins, geometry expects " +
                       std::to_string(g.NumBins()));
  }
  Waveform out;
  out.sample_rate = spec.sample_rate;
  const int frames = spec.frames();
  if (frames == 0) return out;

  const auto window = PaddedWindow(g);
  const std::size_t padded_len =
      static_cast<std::size_t>(frames - 1) * g.hop_length + g.n_fft;
  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> wss(padded_len, 0.0);

  internal::RealFft fft(g.n_fft);
  for (int f = 0; f < frames; ++f) {
    std::copy(spec.bins.row(f).data(), spec.bins.row(f).data() + g.NumBins(),
              fft.freq());
    fft.Inverse();
    const std::size_t start = static_cast<std::size_t>(f) * g.hop_length;
    const double* t = fft.time();
    for (int k = 0; k < g.n_fft; ++k) {
      acc[start + k] += t[k] * window[k];
      wss[start + k] += window[k] * window[k];
    }
  }

  const double floor =
      kWindowSumFloor * *std::max_element(wss.begin(), wss.end());
  const std::size_t len = g.SynthesisLength(frames);
  out.samples.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t j = i + g.left_pad;
    out.samples[i] = acc[j] / std::max(wss[j], floor);
  }
  return out;
}

}  // namespace melbridge
