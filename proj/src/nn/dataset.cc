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

#include "melbridge/nn/dataset.h"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "binary_io.h"
#include "json.hpp"
#include "melbridge/errors.h"
#include "melbridge/mel.h"
#include "melbridge/random.h"
#include "melbridge/stage1.h"

namespace melbridge::nn {

namespace {

constexpr int kManifestVersion = 1;

void CheckId(const std::string& id) {
  if (id.empty() || id == "." || id == "..") throw InvalidInput("item id must be non-empty");
  for (char c : id) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
    if (!ok) throw InvalidInput("item id '" + id + "' has characters outside [A-Za-z0-9_.-]");
  }
}

std::string OriginalPath(const std::string& id) { return "original/" + id + ".wav"; }
std::string IntermediatePath(const std::string& id) { return "intermediate/" + id + ".wav"; }

}  // namespace

PreparedSet PrepareTrainingSet(const std::vector<Waveform>& corpus,
                               const std::vector<std::string>& ids,
                               const PrepareOptions& options) {
  if (corpus.empty()) throw InvalidInput("prepare: empty corpus");
  if (ids.size() != corpus.size()) throw InvalidInput("prepare: one id per waveform required");
  if (options.n_subsets < 1) throw InvalidInput("prepare: n_subsets must be >= 1");
  std::set<std::string> seen;
  for (const std::string& id : ids) {
    CheckId(id);
    if (!seen.insert(id).second) throw InvalidInput("prepare: duplicate id " + id);
  }

  PreparedSet set;
  set.seed = options.seed;
  std::mt19937_64 config_rng(DeriveSeed(options.seed, 1));
  for (int s = 0; s < options.n_subsets; ++s) {
    set.subset_configs.push_back(SampleRandomConfig(config_rng, options.exclude));
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng(DeriveSeed(options.seed, 2));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[UniformIndex(split_rng, i)]);
  }
  std::vector<int> subset_of(corpus.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    subset_of[order[k]] = static_cast<int>(k % options.n_subsets);
  }

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    PreparedItem item;
    item.id = ids[i];
    item.subset = subset_of[i];
    item.original = corpus[i];
    const MelConfig& src = set.subset_configs[item.subset];
    const Waveform at_rate = corpus[i].sample_rate == src.sample_rate
                                 ? corpus[i]
                                 : Resample(corpus[i], src.sample_rate);
    item.intermediate = IntermediateWaveform(ExtractMel(at_rate, src));
    set.items.push_back(std::move(item));
    if (options.progress) options.progress(i + 1, corpus.size());
  }
  return set;
}

std::string ManifestJson(const PreparedSet& set) {
  nlohmann::ordered_json doc;
  doc["version"] = kManifestVersion;
  doc["seed"] = set.seed;
  doc["n_subsets"] = set.subset_configs.size();
  nlohmann::ordered_json subsets = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < set.subset_configs.size(); ++s) {
    nlohmann::ordered_json members = nlohmann::ordered_json::array();
    for (const PreparedItem& item : set.items) {
      if (item.subset == static_cast<int>(s)) members.push_back(item.id);
    }
    subsets.push_back({{"index", s},
                       {"config", SerializeConfig(set.subset_configs[s])},
                       {"items", members}});
  }
  doc["subsets"] = subsets;
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const PreparedItem& item : set.items) {
    items.push_back({{"id", item.id},
                     {"subset", item.subset},
                     {"original", OriginalPath(item.id)},
                     {"intermediate", IntermediatePath(item.id)}});
  }
  doc["items"] = items;
  return doc.dump(2) + "\n";
}

void SavePreparedSet(const PreparedSet& set, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "original", ec);
  fs::create_directories(fs::path(dir) / "intermediate", ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  for (const PreparedItem& item : set.items) {
    WriteWav(item.original, (fs::path(dir) / OriginalPath(item.id)).string());
    Waveform inter = item.intermediate;
    const double peak = MaxAbs(inter);
    if (peak > 0.999) inter = PeakNormalize(inter, 0.999);
    WriteWav(inter, (fs::path(dir) / IntermediatePath(item.id)).string());
  }
  internal::WriteFileBytes((fs::path(dir) / "manifest.json").string(), ManifestJson(set));
}

PreparedSet LoadPreparedSet(const std::string& dir) {
  namespace fs = std::filesystem;
  const std::string path = (fs::path(dir) / "manifest.json").string();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(internal::ReadFileBytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  PreparedSet set;
  try {
    if (doc.at("version").get<int>() != kManifestVersion) {
      throw IoError(path + ": unsupported manifest version");
    }
    set.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& s : doc.at("subsets")) {
      set.subset_configs.push_back(ParseConfig(s.at("config").get<std::string>()));
    }
    for (const auto& j : doc.at("items")) {
      PreparedItem item;
      item.id = j.at("id").get<std::string>();
      CheckId(item.id);
      item.subset = j.at("subset").get<int>();
      if (item.subset < 0 || item.subset >= static_cast<int>(set.subset_configs.size())) {
        throw IoError(path + ": item " + item.id + " has an out-of-range subset");
      }
      item.original = ReadWav((fs::path(dir) / j.at("original").get<std::string>()).string());
      item.intermediate =
          ReadWav((fs::path(dir) / j.at("intermediate").get<std::string>()).string());
      set.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  if (set.items.empty()) throw IoError(path + ": no items");
  return set;
}

}  // namespace melbridge::nn
