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

#include "melbridge/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "melbridge/random.h"

namespace melbridge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Raised-cosine gate with `ramp`-second edges.
double Gate(double t, double start, double end, double ramp) {
  if (t <= start || t >= end) return 0.0;
  const double a = std::min(1.0, (t - start) / ramp);
  const double b = std::min(1.0, (end - t) / ramp);
  const double g = std::min(a, b);
  return 0.5 - 0.5 * std::cos(std::numbers::pi * g);
}

}  // namespace

Waveform Sine(double hz, double seconds, int sample_rate, double amplitude) {
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(static_cast<std::size_t>(std::lround(seconds * sample_rate)));
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = amplitude * std::sin(kTwoPi * hz * i / sample_rate);
  }
  return w;
}

Waveform WhiteNoise(std::mt19937_64& rng, double seconds, int sample_rate,
                    double amplitude) {
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(static_cast<std::size_t>(std::lround(seconds * sample_rate)));
  for (double& s : w.samples) s = UniformRange(rng, -amplitude, amplitude);
  return w;
}

Waveform SyntheticClip(std::mt19937_64& rng, double seconds, int sample_rate) {
  const std::size_t n = static_cast<std::size_t>(std::lround(seconds * sample_rate));
  const double nyquist = sample_rate / 2.0;

  const double f0_start = UniformRange(rng, 90.0, 260.0);
  const double f0_end = f0_start * UniformRange(rng, 0.8, 1.25);
  const double vibrato_hz = UniformRange(rng, 4.0, 6.5);
  const double vibrato_depth = UniformRange(rng, 0.005, 0.025);
  const double tilt = UniformRange(rng, 0.8, 1.6);

  struct Formant { double hz, width, gain; };
  Formant formants[3];
  const double formant_lo[3] = {300.0, 900.0, 2200.0};
  const double formant_hi[3] = {900.0, 2200.0, 3800.0};
  for (int i = 0; i < 3; ++i) {
    formants[i] = {UniformRange(rng, formant_lo[i], formant_hi[i]),
                   UniformRange(rng, 80.0, 250.0), UniformRange(rng, 2.0, 8.0)};
  }
  auto envelope = [&](double hz) {
    double g = 1.0;
    for (const auto& f : formants) {
      const double d = (hz - f.hz) / f.width;
      g += f.gain * std::exp(-0.5 * d * d);
    }
    return g;
  };

  // Two to four voiced segments separated by short gaps.
  const int syllables = 2 + static_cast<int>(UniformIndex(rng, 3));
  std::vector<std::pair<double, double>> segments;
  const double slot = seconds / syllables;
  for (int s = 0; s < syllables; ++s) {
    const double start = s * slot + UniformRange(rng, 0.0, 0.2) * slot;
    const double end = (s + 1) * slot - UniformRange(rng, 0.05, 0.25) * slot;
    segments.emplace_back(start, end);
  }

  // Breath noise rides on the syllables; a much quieter room tone fills
  // the gaps. Both are low-passed like natural recordings.
  const double breath_level = UniformRange(rng, 0.004, 0.02);
  const double room_level = UniformRange(rng, 0.0003, 0.002);
  const double noise_pole = UniformRange(rng, 0.3, 0.9);

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(n, 0.0);
  double phase = 0.0;
  double noise_state = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double glide = f0_start + (f0_end - f0_start) * (t / seconds);
    const double f0 =
        glide * (1.0 + vibrato_depth * std::sin(kTwoPi * vibrato_hz * t));
    phase += kTwoPi * f0 / sample_rate;
    if (phase > kTwoPi) phase -= kTwoPi;

    double gate = 0.0;
    for (const auto& [a, b] : segments) gate = std::max(gate, Gate(t, a, b, 0.03));

    double voiced = 0.0;
    if (gate > 0.0) {
      for (int k = 1; k * f0 < 0.95 * nyquist; ++k) {
        voiced += std::pow(k, -tilt) * envelope(k * f0) * std::sin(k * phase);
      }
    }
    noise_state = noise_pole * noise_state + UniformRange(rng, -1.0, 1.0);
    const double noise = (1 - noise_pole) * noise_state;
    w.samples[i] = 0.08 * gate * voiced + (breath_level * gate + room_level) * noise;
  }
  return PeakNormalize(w, 0.5);
}

std::vector<Waveform> SyntheticCorpus(std::size_t n, std::uint64_t seed,
                                      double seconds, int sample_rate) {
  std::vector<Waveform> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, i));
    out.push_back(SyntheticClip(rng, seconds, sample_rate));
  }
  return out;
}

}  // namespace melbridge
