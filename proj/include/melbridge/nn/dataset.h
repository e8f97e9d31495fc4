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

#ifndef MELBRIDGE_NN_DATASET_H_
#define MELBRIDGE_NN_DATASET_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "melbridge/audio.h"
#include "melbridge/config.h"

namespace melbridge::nn {

struct PreparedItem {
  std::string id;
  int subset = 0;
  Waveform original;
  // Stage-1 output for the original extracted under its subset's source
  // config, at that config's rate.
  Waveform intermediate;
};

struct PreparedSet {
  std::uint64_t seed = 0;
  std::vector<MelConfig> subset_configs;
  std::vector<PreparedItem> items;
};

struct PrepareOptions {
  int n_subsets = 100;
  std::uint64_t seed = 0;
  // Source configs are never drawn from this list.
  std::vector<MelConfig> exclude = BuiltinConfigs();
  // Called after each item with (done, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

// Shuffles the corpus into n_subsets groups (sizes differ by at most one),
// draws one source config per group and runs Stage 1 on every item under
// its group's config. ids label the items and must be unique, non-empty
// and filename-safe ([A-Za-z0-9_.-]).
PreparedSet PrepareTrainingSet(const std::vector<Waveform>& corpus,
                               const std::vector<std::string>& ids,
                               const PrepareOptions& options);

// Directory layout: manifest.json, original/<id>.wav,
// intermediate/<id>.wav. WAVs are 16-bit; an intermediate whose peak
// exceeds 0.999 is scaled down first (extraction peak-normalizes, so the
// scale does not matter downstream).
void SavePreparedSet(const PreparedSet& set, const std::string& dir);
PreparedSet LoadPreparedSet(const std::string& dir);

// The manifest document alone (deterministic text).
std::string ManifestJson(const PreparedSet& set);

}  // namespace melbridge::nn

#endif  // MELBRIDGE_NN_DATASET_H_
