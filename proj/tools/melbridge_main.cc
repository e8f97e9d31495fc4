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

// Command-line front end: extraction, conversion, inversion, baselines,
// corpus preparation, training and evaluation.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "melbridge/audio.h"
#include "melbridge/baselines.h"
#include "melbridge/config.h"
#include "melbridge/errors.h"
#include "melbridge/mel.h"
#include "melbridge/metrics.h"
#include "melbridge/nn/dataset.h"
#include "melbridge/nn/trainer.h"
#include "melbridge/nn/unet.h"
#include "melbridge/nn/weights_io.h"
#include "melbridge/stage1.h"
#include "melbridge/synthetic.h"

namespace melbridge {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct GlobalFlags {
  std::uint64_t seed = 0;
  int jobs = 1;
  bool quiet = false;
};

void Note(const GlobalFlags& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << "\n";
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// is rethrown after all workers stop.
void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        {
          std::lock_guard<std::mutex> lock(mu);
          if (error) return;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::pair<std::string, std::string>> Pairs(const std::vector<std::string>& args,
                                                       const char* what) {
  if (args.empty() || args.size() % 2 != 0) {
    throw InvalidInput(std::string(what) + ": expected pairs of paths, got " +
                       std::to_string(args.size()) + " argument(s)");
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < args.size(); i += 2) out.emplace_back(args[i], args[i + 1]);
  return out;
}

Waveform AtRate(const Waveform& w, int rate) {
  return w.sample_rate == rate ? w : Resample(w, rate);
}

// Waveforms leaving the tool must fit 16-bit PCM; louder ones are scaled.
void WriteWavSafely(Waveform w, const std::string& path) {
  if (MaxAbs(w) > 0.999) w = PeakNormalize(w, 0.999);
  WriteWav(w, path);
}

MelSpectrogram ReadSourceMel(const std::string& path, const std::string& src_config) {
  MelSpectrogram m = ReadMelFile(path);
  if (!src_config.empty() && !(ResolveConfig(src_config) == m.config)) {
    throw InvalidInput(path + ": embedded config differs from --src " + src_config);
  }
  return m;
}

// ---- extract ---------------------------------------------------------------

struct ExtractArgs {
  std::string wav, config, out;
};

void RunExtract(const ExtractArgs& a, const GlobalFlags&) {
  const MelConfig cfg = ResolveConfig(a.config);
  const Waveform w = ReadWav(a.wav);
  WriteMelFile(ExtractMel(AtRate(w, cfg.sample_rate), cfg), a.out);
}

// ---- convert ---------------------------------------------------------------

struct ConvertArgs {
  std::string src, tgt, weights;
  int stage = 1;
  std::vector<std::string> paths;
};

void RunConvert(const ConvertArgs& a, const GlobalFlags& g) {
  if (a.stage == 2 && a.weights.empty()) throw InvalidInput("convert: --stage 2 needs --weights");
  if (a.stage == 1 && !a.weights.empty()) {
    throw InvalidInput("convert: --weights only applies to --stage 2");
  }
  const auto pairs = Pairs(a.paths, "convert");
  const MelConfig tgt = ResolveConfig(a.tgt);
  std::optional<nn::UNetWeights<float>> weights;
  if (a.stage == 2) {
    weights = nn::ReadWeights(a.weights);
    if (weights->spec.n_mels != tgt.n_mels) {
      throw InvalidInput("convert: weights expect " + std::to_string(weights->spec.n_mels) +
                         " mel bins, target config has " + std::to_string(tgt.n_mels));
    }
  }
  ParallelFor(pairs.size(), g.jobs, [&](std::size_t i) {
    const MelSpectrogram m = ReadSourceMel(pairs[i].first, a.src);
    MelSpectrogram out = ApproximateConvert(m, tgt);
    if (weights) out = nn::Adapt(out, *weights);
    WriteMelFile(out, pairs[i].second);
    Note(g, "converted " + pairs[i].first + " -> " + pairs[i].second);
  });
}

// ---- invert ----------------------------------------------------------------

struct InvertArgs {
  std::string mel, config, out;
  int iterations = kGriffinLimIterations;
};

void RunInvert(const InvertArgs& a, const GlobalFlags&) {
  MelSpectrogram m = ReadMelFile(a.mel);
  if (!a.config.empty() && !(ResolveConfig(a.config) == m.config)) {
    throw InvalidInput(a.mel + ": embedded config differs from --config " + a.config);
  }
  if (a.iterations < 1) throw InvalidInput("invert: --iterations must be >= 1");
  GriffinLimOptions options;
  options.iterations = a.iterations;
  WriteWavSafely(IntermediateWaveform(m, options), a.out);
}

// ---- baseline --------------------------------------------------------------

struct BaselineArgs {
  std::string method, src, tgt;
  std::vector<std::string> paths;
};

void RunBaseline(const BaselineArgs& a, const GlobalFlags& g) {
  const auto pairs = Pairs(a.paths, "baseline");
  const MelConfig tgt = ResolveConfig(a.tgt);
  ParallelFor(pairs.size(), g.jobs, [&](std::size_t i) {
    const MelSpectrogram m = ReadSourceMel(pairs[i].first, a.src);
    WriteMelFile(a.method == "interp" ? InterpolationBaseline(m, tgt)
                                      : GriffinOnlyBaseline(m, tgt),
                 pairs[i].second);
  });
}

// ---- prepare ---------------------------------------------------------------

struct PrepareArgs {
  std::vector<std::string> paths;  // [CORPUS_DIR] OUT_DIR
  int subsets = 100;
  int synthetic = 0;
};

void RunPrepare(const PrepareArgs& a, const GlobalFlags& g) {
  std::vector<Waveform> corpus;
  std::vector<std::string> ids;
  const std::size_t want = a.synthetic > 0 ? 1 : 2;
  if (a.paths.size() != want) {
    throw InvalidInput(a.synthetic > 0 ? "prepare --synthetic: expected OUT_DIR only"
                                       : "prepare: expected CORPUS_DIR OUT_DIR");
  }
  const std::string& out_dir = a.paths.back();
  if (a.synthetic > 0) {
    corpus = SyntheticCorpus(static_cast<std::size_t>(a.synthetic), g.seed);
    for (int i = 0; i < a.synthetic; ++i) {
      char id[32];
      std::snprintf(id, sizeof(id), "synth%05d", i);
      ids.push_back(id);
    }
  } else {
    const std::string& dir = a.paths.front();
    if (!fs::is_directory(dir)) throw IoError("prepare: not a directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      corpus.push_back(ReadWav(f.string()));
      ids.push_back(f.stem().string());
    }
  }
  nn::PrepareOptions options;
  options.n_subsets = a.subsets;
  options.seed = g.seed;
  if (!g.quiet) {
    options.progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 10 == 0) {
        std::cerr << "prepared " << done << "/" << total << "\n";
      }
    };
  }
  nn::SavePreparedSet(nn::PrepareTrainingSet(corpus, ids, options), out_dir);
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string prepared, out, config, log;
  std::optional<int> epochs, batch_size, segment_frames, levels, channels, configs_per_epoch,
      halving_period;
  std::optional<double> learning_rate, validation_fraction;
};

// Training settings file: a JSON object with any of the TrainingConfig keys.
nn::TrainingConfig LoadTrainingConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  if (!doc.is_object()) throw InvalidInput(path + ": expected a JSON object");
  nn::TrainingConfig t;
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "epochs") t.epochs = v.get<int>();
      else if (key == "batch_size") t.batch_size = v.get<int>();
      else if (key == "segment_frames") t.segment_frames = v.get<int>();
      else if (key == "learning_rate") t.learning_rate = v.get<double>();
      else if (key == "halving_period") t.halving_period = v.get<int>();
      else if (key == "validation_fraction") t.validation_fraction = v.get<double>();
      else if (key == "configs_per_epoch") t.configs_per_epoch = v.get<int>();
      else if (key == "levels") t.model.levels = v.get<int>();
      else if (key == "base_channels") t.model.base_channels = v.get<int>();
      else if (key == "beta1") t.optimizer.beta1 = v.get<double>();
      else if (key == "beta2") t.optimizer.beta2 = v.get<double>();
      else if (key == "epsilon") t.optimizer.epsilon = v.get<double>();
      else if (key == "weight_decay") t.optimizer.weight_decay = v.get<double>();
      else throw InvalidInput(path + ": unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  return t;
}

void RunTrain(const TrainArgs& a, const GlobalFlags& g) {
  nn::TrainingConfig t = a.config.empty() ? nn::TrainingConfig{} : LoadTrainingConfig(a.config);
  if (a.epochs) t.epochs = *a.epochs;
  if (a.batch_size) t.batch_size = *a.batch_size;
  if (a.segment_frames) t.segment_frames = *a.segment_frames;
  if (a.levels) t.model.levels = *a.levels;
  if (a.channels) t.model.base_channels = *a.channels;
  if (a.configs_per_epoch) t.configs_per_epoch = *a.configs_per_epoch;
  if (a.halving_period) t.halving_period = *a.halving_period;
  if (a.learning_rate) t.learning_rate = *a.learning_rate;
  if (a.validation_fraction) t.validation_fraction = *a.validation_fraction;
  t.seed = g.seed;
  nn::ValidateTrainingConfig(t);

  const nn::PreparedSet set = nn::LoadPreparedSet(a.prepared);
  t.model.n_mels = set.subset_configs.front().n_mels;
  const std::string log_path = a.log.empty() ? a.out + ".log.ndjson" : a.log;
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw IoError("cannot write " + log_path);
  const nn::TrainingResult result = nn::Train(set, t, [&](const nn::EpochRecord& r) {
    ordered_json rec{{"epoch", r.epoch},
                     {"train_loss", r.train_loss},
                     {"val_loss", r.val_loss},
                     {"lr", r.learning_rate},
                     {"skipped_steps", r.skipped_steps}};
    log << rec.dump() << "\n";
    log.flush();
    Note(g, rec.dump());
  });
  if (!log) throw IoError("write failed: " + log_path);
  nn::WriteWeights(result.best, a.out);
  Note(g, "best epoch " + std::to_string(result.best_epoch) + " -> " + a.out);
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> paths;
};

void RunEval(const EvalArgs& a, const GlobalFlags& g) {
  const auto pairs = Pairs(a.paths, "eval");
  std::vector<std::string> lines(pairs.size());
  ParallelFor(pairs.size(), g.jobs, [&](std::size_t i) {
    const Waveform x = ReadWav(pairs[i].first);
    const Waveform y = ReadWav(pairs[i].second);
    const F0Track fx = EstimateF0(x), fy = EstimateF0(y);
    const std::optional<double> rmse = F0Rmse(fx, fy);
    ordered_json rec{{"mcd_db", MelCepstralDistortion(x, y)},
                     {"f0_rmse_hz", rmse ? ordered_json(*rmse) : ordered_json(nullptr)},
                     {"vuv_error_pct", VuvErrorPercent(fx, fy)},
                     {"frames", CommonCepstralFrames(x, y)}};
    lines[i] = rec.dump();
  });
  for (const std::string& line : lines) std::cout << line << "\n";
}

int Main(int argc, char** argv) {
  CLI::App app{"Mel-spectrogram configuration converter"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Parallel workers for batch commands")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress progress messages");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "WAV -> mel file under a config");
  extract->add_option("wav", ex.wav)->required();
  extract->add_option("config", ex.config, "Config file or builtin name")->required();
  extract->add_option("out", ex.out)->required();

  ConvertArgs cv;
  auto* convert = app.add_subcommand("convert", "Mel file -> mel file under another config");
  convert->add_option("--src", cv.src, "Expected source config (checked against the file)");
  convert->add_option("--tgt", cv.tgt, "Target config file or builtin name")->required();
  convert->add_option("--stage", cv.stage)->check(CLI::IsMember({1, 2}))->capture_default_str();
  convert->add_option("--weights", cv.weights, "UAW1 weights for stage 2");
  convert->add_option("paths", cv.paths, "IN OUT [IN OUT ...]")->required();

  InvertArgs iv;
  auto* invert = app.add_subcommand("invert", "Mel file -> WAV by pseudo-inverse and Griffin-Lim");
  invert->add_option("mel", iv.mel)->required();
  invert->add_option("out", iv.out)->required();
  invert->add_option("--config", iv.config, "Expected config (checked against the file)");
  invert->add_option("--iterations", iv.iterations)->capture_default_str();

  BaselineArgs bl;
  auto* baseline = app.add_subcommand("baseline", "Reference conversions");
  baseline->add_option("--method", bl.method)
      ->required()
      ->check(CLI::IsMember({"interp", "griffin"}));
  baseline->add_option("--src", bl.src, "Expected source config (checked against the file)");
  baseline->add_option("--tgt", bl.tgt)->required();
  baseline->add_option("paths", bl.paths, "IN OUT [IN OUT ...]")->required();

  PrepareArgs pr;
  auto* prepare = app.add_subcommand("prepare", "Stage-1 intermediates for training");
  prepare->add_option("paths", pr.paths, "CORPUS_DIR OUT_DIR (OUT_DIR alone with --synthetic)")
      ->required();
  prepare->add_option("--synthetic", pr.synthetic, "Generate this many synthetic clips instead");
  prepare->add_option("--subsets", pr.subsets)->capture_default_str();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train the post-processing network");
  train->add_option("prepared", tr.prepared, "Directory written by prepare")->required();
  train->add_option("out", tr.out, "Output weights file")->required();
  train->add_option("--config", tr.config, "JSON training settings");
  train->add_option("--log", tr.log, "Epoch log (default OUT.log.ndjson)");
  train->add_option("--epochs", tr.epochs);
  train->add_option("--batch-size", tr.batch_size);
  train->add_option("--segment-frames", tr.segment_frames);
  train->add_option("--levels", tr.levels);
  train->add_option("--channels", tr.channels, "Width of the first level");
  train->add_option("--configs-per-epoch", tr.configs_per_epoch);
  train->add_option("--halving-period", tr.halving_period);
  train->add_option("--lr", tr.learning_rate);
  train->add_option("--validation-fraction", tr.validation_fraction);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "MCD, F0 RMSE and V/UV error per WAV pair");
  eval->add_option("paths", ev.paths, "A B [A B ...]")->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*extract) RunExtract(ex, g);
    else if (*convert) RunConvert(cv, g);
    else if (*invert) RunInvert(iv, g);
    else if (*baseline) RunBaseline(bl, g);
    else if (*prepare) RunPrepare(pr, g);
    else if (*train) RunTrain(tr, g);
    else if (*eval) RunEval(ev, g);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}

}  // namespace
}  // namespace melbridge

int main(int argc, char** argv) { return melbridge::Main(argc, argv); }
