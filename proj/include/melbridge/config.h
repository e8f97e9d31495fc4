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

#ifndef MELBRIDGE_CONFIG_H_
#define MELBRIDGE_CONFIG_H_

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace melbridge {

enum class LogBase { kTen, kE };

// Full parametrization of a mel extraction pipeline. Field names match the
// keys of the config document format (see ParseConfig).
struct MelConfig {
  int sample_rate = 22050;
  int n_mels = 80;

  // Non-normalizable half: no closed-form mel-to-mel map exists when these
  // change.
  double wave_peak_norm = 1.0;
  int n_fft = 1024;
  int win_length = 1024;
  int hop_length = 256;
  int left_pad = 0;
  int right_pad = 0;
  double fmin = 0.0;
  double fmax = 8000.0;

  // Normalizable half: value-space conventions with exact conversions.
  bool amp_to_db = true;
  LogBase log_base = LogBase::kE;
  int log_factor = 1;
  bool normalize_mel = false;
  double ref_level_db = 0.0;
  double min_level_db = -100.0;

  bool operator==(const MelConfig&) const = default;
};

struct NonNormalizableParams {
  double wave_peak_norm = 1.0;
  int n_fft = 1024;
  int win_length = 1024;
  int hop_length = 256;
  int left_pad = 0;
  int right_pad = 0;
  double fmin = 0.0;
  double fmax = 8000.0;

  bool operator==(const NonNormalizableParams&) const = default;
};

struct NormalizableParams {
  bool amp_to_db = true;
  LogBase log_base = LogBase::kE;
  int log_factor = 1;
  bool normalize_mel = false;
  double ref_level_db = 0.0;
  double min_level_db = -100.0;

  bool operator==(const NormalizableParams&) const = default;
};

// The value space every learned computation happens in: natural-log
// amplitude, factor 1, no [0,1] normalization.
inline constexpr NormalizableParams kNormalizingBase{
    true, LogBase::kE, 1, false, 0.0, -100.0};

// Lossless partition of a MelConfig. sample_rate and n_mels belong to
// neither half and ride along.
struct ConfigParts {
  int sample_rate = 22050;
  int n_mels = 80;
  NonNormalizableParams non_normalizable;
  NormalizableParams normalizable;

  bool operator==(const ConfigParts&) const = default;
};

ConfigParts SplitConfig(const MelConfig& cfg);
MelConfig CombineConfig(const ConfigParts& parts);

// Throws InvalidInput naming the offending field and its bound.
void ValidateConfig(const MelConfig& cfg);
void ValidateNormalizable(const NormalizableParams& p);

// Parses the `key = value` document format. Keys are the MelConfig field
// names, `#` starts a comment, blank lines are ignored, log_base is `10` or
// `e`, booleans are `true`/`false`. Missing keys keep the MelConfig
// defaults. The result is validated.
MelConfig ParseConfig(std::string_view text);

// Canonical document: every field, fixed order, shortest round-trip numbers.
// ParseConfig(SerializeConfig(c)) == c for every valid c.
std::string SerializeConfig(const MelConfig& cfg);

MelConfig LoadConfigFile(const std::string& path);
void SaveConfigFile(const MelConfig& cfg, const std::string& path);

// Resolves either a path to a config document or a builtin name ("cfg3").
MelConfig ResolveConfig(const std::string& path_or_name);

// The seven reference configurations "cfg1" ... "cfg7".
MelConfig BuiltinConfig(std::string_view name);
const std::vector<std::string>& BuiltinConfigNames();
std::vector<MelConfig> BuiltinConfigs();

inline constexpr int kConfigFeatureDim = 8;
using ConfigFeatureVector = std::array<double, kConfigFeatureDim>;

// [wave_peak_norm, n_fft, ln(win_length), ln(hop_length), left_pad,
//  right_pad, fmin, fmax] before rescaling.
ConfigFeatureVector RawConfigFeatures(const NonNormalizableParams& p);

// RawConfigFeatures followed by a fixed per-dimension affine map that takes
// the sampling grid into [0,1]:
//   peak (x-0.9)/0.1, n_fft x/2048, ln win over [ln 800, ln 1200],
//   ln hop over [ln 200, ln 300], pads x/1024, fmin x/90, fmax x/12000.
ConfigFeatureVector EncodeConfigFeatures(const NonNormalizableParams& p);

// Draws every non-normalizable and normalizable field uniformly from the
// training grid: peak in [0.9, 1.0], n_fft {1024, 2048}, win {800, 900,
// 1024, 1100, 1200}, hop win/4, each pad {0, (n_fft-hop)/2}, fmin {0, 30,
// 50, 70, 90}, fmax {7600, 8000, 9500, 11025}, amp_to_db, log_base,
// log_factor and normalize_mel from their two-value sets, ref 0, min -100.
// Invalid combinations and members of `exclude` are redrawn; throws
// std::runtime_error after `max_attempts` rejections.
MelConfig SampleRandomConfig(std::mt19937_64& rng,
                             std::span<const MelConfig> exclude,
                             int max_attempts = 10000);

}  // namespace melbridge

#endif  // MELBRIDGE_CONFIG_H_
