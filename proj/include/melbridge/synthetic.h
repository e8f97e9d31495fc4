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

#ifndef MELBRIDGE_SYNTHETIC_H_
#define MELBRIDGE_SYNTHETIC_H_

#include <cstdint>
#include <random>
#include <vector>

#include "melbridge/audio.h"

namespace melbridge {

Waveform Sine(double hz, double seconds, int sample_rate, double amplitude = 0.5);
Waveform WhiteNoise(std::mt19937_64& rng, double seconds, int sample_rate,
                    double amplitude = 0.3);

// A speech-like test signal: a gliding harmonic tone with vibrato, spectral
// tilt and three random formants, gated into a few syllables, plus one-pole
// low-passed breath noise on the syllables and quieter room noise
// throughout. Peak 0.5.
Waveform SyntheticClip(std::mt19937_64& rng, double seconds = 1.0,
                       int sample_rate = 22050);

// n clips, clip i drawn from its own stream derived from `seed`.
std::vector<Waveform> SyntheticCorpus(std::size_t n, std::uint64_t seed,
                                      double seconds = 1.0,
                                      int sample_rate = 22050);

}  // namespace melbridge

#endif  // MELBRIDGE_SYNTHETIC_H_
