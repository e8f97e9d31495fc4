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

#ifndef MELBRIDGE_MEL_H_
#define MELBRIDGE_MEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "melbridge/audio.h"
#include "melbridge/config.h"
#include "melbridge/stft.h"

namespace melbridge {

enum class MelScale { kSlaney, kHtk };

double HzToMel(double hz, MelScale scale = MelScale::kSlaney);
double MelToHz(double mel, MelScale scale = MelScale::kSlaney);

// Triangular filters with centers equally spaced in mel between fmin and
// fmax, each scaled to unit area (2 / bandwidth in Hz). Immutable once built.
class MelFilterbank {
 public:
  // Throws InvalidInput on bad bounds or when a filter would cover no FFT
  // bin (too many filters for the frequency resolution).
  MelFilterbank(int sample_rate, int n_fft, int n_mels, double fmin,
                double fmax, MelScale scale = MelScale::kSlaney);

  static MelFilterbank FromConfig(const MelConfig& cfg,
                                  MelScale scale = MelScale::kSlaney);

  const RowMatrix& weights() const { return weights_; }  // n_mels x bins
  int n_mels() const { return static_cast<int>(weights_.rows()); }
  int num_bins() const { return static_cast<int>(weights_.cols()); }
  int sample_rate() const { return sample_rate_; }
  int n_fft() const { return n_fft_; }
  double fmin() const { return fmin_; }
  double fmax() const { return fmax_; }

  // Peak frequency of each triangle.
  std::vector<double> CenterFrequencies() const;

  // frames x bins -> frames x n_mels.
  RowMatrix Apply(const RowMatrix& magnitudes) const;

 private:
  int sample_rate_;
  int n_fft_;
  double fmin_;
  double fmax_;
  MelScale scale_;
  RowMatrix weights_;
};

inline constexpr double kAmplitudeFloor = 1e-5;

// factor * log_base(max(v, 1e-5)).
double AmpToDb(double v, LogBase base, int factor);
double DbToAmp(double db, LogBase base, int factor);
double LogBaseValue(LogBase base);

enum class ValueSpaceKind : std::uint8_t {
  kLinearAmplitude = 0,
  kDb = 1,          // factor * log_base(amplitude)
  kNormalized = 2,  // kDb mapped through the config's ref/min levels
};

struct ValueSpace {
  ValueSpaceKind kind = ValueSpaceKind::kDb;
  LogBase log_base = LogBase::kE;
  int log_factor = 1;

  bool operator==(const ValueSpace&) const = default;

  // MELT tag byte: bits 0-1 kind, bit 2 set for base e, bit 3 set for
  // factor 1. Linear amplitude always encodes as 0.
  std::uint8_t Tag() const;
  static ValueSpace FromTag(std::uint8_t tag);
};

// The space ExtractMel produces for these settings.
ValueSpace ValueSpaceFor(const NormalizableParams& p);
inline constexpr ValueSpace kBaseValueSpace{ValueSpaceKind::kDb, LogBase::kE, 1};

std::string ToString(const ValueSpace& v);

// frames x n_mels, tagged with the config it was extracted under and the
// space its values live in (which may be the normalizing base rather than
// the config's own space).
struct MelSpectrogram {
  RowMatrix values;
  ValueSpace space;
  MelConfig config;

  int frames() const { return static_cast<int>(values.rows()); }
  int n_mels() const { return static_cast<int>(values.cols()); }
};

// Peak-normalize to cfg.wave_peak_norm, STFT, filterbank, then dB and
// [0,1] normalization as cfg asks. Requires w.sample_rate == cfg.sample_rate
// and a non-empty waveform (InvalidInput otherwise).
MelSpectrogram ExtractMel(const Waveform& w, const MelConfig& cfg);

// MELT file: "MELT", u32 version, u32 n_mels, u32 n_frames, u8 value-space
// tag, u32 config length + config document bytes, then frames x mels
// float32, frame-major. All integers and floats little-endian.
inline constexpr std::uint32_t kMelFileVersion = 1;
std::string EncodeMelFile(const MelSpectrogram& m);
MelSpectrogram DecodeMelFile(const std::string& bytes);
void WriteMelFile(const MelSpectrogram& m, const std::string& path);
MelSpectrogram ReadMelFile(const std::string& path);

}  // namespace melbridge

#endif  // MELBRIDGE_MEL_H_
