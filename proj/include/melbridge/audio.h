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

#ifndef MELBRIDGE_AUDIO_H_
#define MELBRIDGE_AUDIO_H_

#include <string>
#include <vector>

namespace melbridge {

// Mono samples, nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 22050;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

double MaxAbs(const Waveform& w);

// Scales so that max |sample| == peak. An all-zero input is returned
// unchanged and *silent (when given) is set.
Waveform PeakNormalize(const Waveform& w, double peak, bool* silent = nullptr);

// Band-limited rational resampling. Output length is
// round(size * target_rate / sample_rate), so durations agree within one
// sample. Throws InvalidInput on a non-positive rate.
Waveform Resample(const Waveform& w, int target_rate);

// RIFF/WAVE, PCM 16-bit little-endian, mono. Samples map as s / 32768 on
// read and round(x * 32768) clamped to int16 on write, so 16-bit data
// round-trips exactly.
Waveform ReadWav(const std::string& path);
void WriteWav(const Waveform& w, const std::string& path);
std::string EncodeWav(const Waveform& w);
Waveform DecodeWav(const std::string& bytes);

}  // namespace melbridge

#endif  // MELBRIDGE_AUDIO_H_
