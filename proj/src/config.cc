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

#include "melbridge/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "melbridge/errors.h"
#include "melbridge/random.h"

namespace melbridge {

namespace {

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void Fail(int line, const std::string& msg) {
  throw InvalidInput("config line " + std::to_string(line) + ": " + msg);
}

int ParseInt(std::string_view v, int line, std::string_view key) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    Fail(line, "expected an integer for '" + std::string(key) + "', got '" +
                   std::string(v) + "'");
  }
  return out;
}

double ParseDouble(std::string_view v, int line, std::string_view key) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    Fail(line, "expected a number for '" + std::string(key) + "', got '" +
                   std::string(v) + "'");
  }
  return out;
}

bool ParseBool(std::string_view v, int line, std::string_view key) {
  if (v == "true") return true;
  if (v == "false") return false;
  Fail(line, "expected true/false for '" + std::string(key) + "', got '" +
                 std::string(v) + "'");
}

[[noreturn]] void Violation(const std::string& field, const std::string& bound) {
  throw InvalidInput("invalid config: " + field + " must satisfy " + bound);
}

MelConfig MakeBuiltin(int sample_rate, double peak, int n_fft, int win,
                      int hop, int pad, double fmin, double fmax,
                      LogBase base, int factor, bool normalize) {
  MelConfig c;
  c.sample_rate = sample_rate;
  c.n_mels = 80;
  c.wave_peak_norm = peak;
  c.n_fft = n_fft;
  c.win_length = win;
  c.hop_length = hop;
  c.left_pad = pad;
  c.right_pad = pad;
  c.fmin = fmin;
  c.fmax = fmax;
  c.amp_to_db = true;
  c.log_base = base;
  c.log_factor = factor;
  c.normalize_mel = normalize;
  c.ref_level_db = 0.0;
  c.min_level_db = -100.0;
  return c;
}

const std::map<std::string, MelConfig, std::less<>>& BuiltinTable() {
  static const auto* table = new std::map<std::string, MelConfig, std::less<>>{
      {"cfg1", MakeBuiltin(22050, 1.0, 2048, 1100, 275, 0, 40, 11025,
                           LogBase::kTen, 20, true)},
      {"cfg2", MakeBuiltin(22050, 1.0, 1024, 1024, 256, 0, 0, 8000,
                           LogBase::kE, 1, false)},
      {"cfg3", MakeBuiltin(22050, 1.0, 1024, 1024, 256, 384, 0, 8000,
                           LogBase::kE, 1, false)},
      {"cfg4", MakeBuiltin(22050, 0.95, 1024, 1024, 256, 384, 0, 11025,
                           LogBase::kTen, 1, false)},
      {"cfg5", MakeBuiltin(24000, 1.0, 2048, 1200, 300, 0, 0, 12000,
                           LogBase::kTen, 20, false)},
      {"cfg6", MakeBuiltin(22050, 0.95, 1024, 1024, 240, 392, 0, 8000,
                           LogBase::kE, 1, false)},
      {"cfg7", MakeBuiltin(16000, 1.0, 465, 465, 160, 0, 80, 8000,
                           LogBase::kE, 1, false)},
  };
  return *table;
}

template <typename T>
const T& Pick(std::mt19937_64& rng, std::span<const T> values) {
  return values[UniformIndex(rng, values.size())];
}

}  // namespace

ConfigParts SplitConfig(const MelConfig& c) {
  ConfigParts p;
  p.sample_rate = c.sample_rate;
  p.n_mels = c.n_mels;
  p.non_normalizable = {c.wave_peak_norm, c.n_fft,    c.win_length,
                        c.hop_length,     c.left_pad, c.right_pad,
                        c.fmin,           c.fmax};
  p.normalizable = {c.amp_to_db,     c.log_base,     c.log_factor,
                    c.normalize_mel, c.ref_level_db, c.min_level_db};
  return p;
}

MelConfig CombineConfig(const ConfigParts& p) {
  MelConfig c;
  c.sample_rate = p.sample_rate;
  c.n_mels = p.n_mels;
  const auto& a = p.non_normalizable;
  c.wave_peak_norm = a.wave_peak_norm;
  c.n_fft = a.n_fft;
  c.win_length = a.win_length;
  c.hop_length = a.hop_length;
  c.left_pad = a.left_pad;
  c.right_pad = a.right_pad;
  c.fmin = a.fmin;
  c.fmax = a.fmax;
  const auto& b = p.normalizable;
  c.amp_to_db = b.amp_to_db;
  c.log_base = b.log_base;
  c.log_factor = b.log_factor;
  c.normalize_mel = b.normalize_mel;
  c.ref_level_db = b.ref_level_db;
  c.min_level_db = b.min_level_db;
  return c;
}

void ValidateNormalizable(const NormalizableParams& p) {
  if (p.log_factor != 1 && p.log_factor != 20) {
    Violation("log_factor", "log_factor in {1, 20}");
  }
  if (!std::isfinite(p.ref_level_db)) Violation("ref_level_db", "finite");
  if (!(p.min_level_db < 0.0) || !std::isfinite(p.min_level_db)) {
    Violation("min_level_db", "min_level_db < 0");
  }
  if (p.normalize_mel && !p.amp_to_db) {
    Violation("normalize_mel", "normalize_mel implies amp_to_db = true");
  }
}

void ValidateConfig(const MelConfig& c) {
  if (c.sample_rate < 1) Violation("sample_rate", "sample_rate >= 1");
  if (c.n_mels < 1) Violation("n_mels", "n_mels >= 1");
  if (!(c.wave_peak_norm > 0.0 && c.wave_peak_norm <= 1.0)) {
    Violation("wave_peak_norm", "0 < wave_peak_norm <= 1");
  }
  if (c.n_fft < 2) Violation("n_fft", "n_fft >= 2");
  if (c.win_length < 1 || c.win_length > c.n_fft) {
    Violation("win_length", "1 <= win_length <= n_fft (" +
                                std::to_string(c.n_fft) + ")");
  }
  if (c.hop_length < 1) Violation("hop_length", "hop_length >= 1");
  if (c.left_pad < 0) Violation("left_pad", "left_pad >= 0");
  if (c.right_pad < 0) Violation("right_pad", "right_pad >= 0");
  if (!(c.fmin >= 0.0)) Violation("fmin", "fmin >= 0");
  if (!(c.fmin < c.fmax)) Violation("fmax", "fmin < fmax");
  const double nyquist = c.sample_rate / 2.0;
  if (!(c.fmax <= nyquist)) {
    Violation("fmax", "fmax <= sample_rate/2 (" + FormatDouble(nyquist) + ")");
  }
  ValidateNormalizable(SplitConfig(c).normalizable);
}

MelConfig ParseConfig(std::string_view text) {
  MelConfig c;
  int line_no = 0;
  std::map<std::string, int, std::less<>> seen;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) Fail(line_no, "expected 'key = value'");
    const std::string_view key = Trim(line.substr(0, eq));
    const std::string_view val = Trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) Fail(line_no, "expected 'key = value'");
    if (!seen.emplace(std::string(key), line_no).second) {
      Fail(line_no, "duplicate key '" + std::string(key) + "'");
    }
    if (key == "sample_rate") c.sample_rate = ParseInt(val, line_no, key);
    else if (key == "n_mels") c.n_mels = ParseInt(val, line_no, key);
    else if (key == "wave_peak_norm") c.wave_peak_norm = ParseDouble(val, line_no, key);
    else if (key == "n_fft") c.n_fft = ParseInt(val, line_no, key);
    else if (key == "win_length") c.win_length = ParseInt(val, line_no, key);
    else if (key == "hop_length") c.hop_length = ParseInt(val, line_no, key);
    else if (key == "left_pad") c.left_pad = ParseInt(val, line_no, key);
    else if (key == "right_pad") c.right_pad = ParseInt(val, line_no, key);
    else if (key == "fmin") c.fmin = ParseDouble(val, line_no, key);
    else if (key == "fmax") c.fmax = ParseDouble(val, line_no, key);
    else if (key == "amp_to_db") c.amp_to_db = ParseBool(val, line_no, key);
    else if (key == "log_base") {
      if (val == "10") c.log_base = LogBase::kTen;
      else if (val == "e") c.log_base = LogBase::kE;
      else Fail(line_no, "log_base must be '10' or 'e'");
    } else if (key == "log_factor") c.log_factor = ParseInt(val, line_no, key);
    else if (key == "normalize_mel") c.normalize_mel = ParseBool(val, line_no, key);
    else if (key == "ref_level_db") c.ref_level_db = ParseDouble(val, line_no, key);
    else if (key == "min_level_db") c.min_level_db = ParseDouble(val, line_no, key);
    else Fail(line_no, "unknown key '" + std::string(key) + "'");
  }
  ValidateConfig(c);
  return c;
}

std::string SerializeConfig(const MelConfig& c) {
  std::ostringstream out;
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "sample_rate = " << c.sample_rate << "\n"
      << "n_mels = " << c.n_mels << "\n"
      << "wave_peak_norm = " << FormatDouble(c.wave_peak_norm) << "\n"
      << "n_fft = " << c.n_fft << "\n"
      << "win_length = " << c.win_length << "\n"
      << "hop_length = " << c.hop_length << "\n"
      << "left_pad = " << c.left_pad << "\n"
      << "right_pad = " << c.right_pad << "\n"
      << "fmin = " << FormatDouble(c.fmin) << "\n"
      << "fmax = " << FormatDouble(c.fmax) << "\n"
      << "amp_to_db = " << b(c.amp_to_db) << "\n"
      << "log_base = " << (c.log_base == LogBase::kTen ? "10" : "e") << "\n"
      << "log_factor = " << c.log_factor << "\n"
      << "normalize_mel = " << b(c.normalize_mel) << "\n"
      << "ref_level_db = " << FormatDouble(c.ref_level_db) << "\n"
      << "min_level_db = " << FormatDouble(c.min_level_db) << "\n";
  return out.str();
}

MelConfig LoadConfigFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfig(buf.str());
}

void SaveConfigFile(const MelConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file: " + path);
  out << SerializeConfig(cfg);
  if (!out) throw IoError("write failed: " + path);
}

MelConfig ResolveConfig(const std::string& path_or_name) {
  if (BuiltinTable().count(path_or_name) != 0) {
    std::ifstream probe(path_or_name);
    if (!probe) return BuiltinConfig(path_or_name);
  }
  return LoadConfigFile(path_or_name);
}

MelConfig BuiltinConfig(std::string_view name) {
  const auto& table = BuiltinTable();
  const auto it = table.find(name);
  if (it == table.end()) {
    throw InvalidInput("unknown builtin config '" + std::string(name) +
                       "' (expected cfg1 ... cfg7)");
  }
  return it->second;
}

const std::vector<std::string>& BuiltinConfigNames() {
  static const auto* names = new std::vector<std::string>{
      "cfg1", "cfg2", "cfg3", "cfg4", "cfg5", "cfg6", "cfg7"};
  return *names;
}

std::vector<MelConfig> BuiltinConfigs() {
  std::vector<MelConfig> out;
  for (const auto& n : BuiltinConfigNames()) out.push_back(BuiltinConfig(n));
  return out;
}

ConfigFeatureVector RawConfigFeatures(const NonNormalizableParams& p) {
  return {p.wave_peak_norm,
          static_cast<double>(p.n_fft),
          std::log(static_cast<double>(p.win_length)),
          std::log(static_cast<double>(p.hop_length)),
          static_cast<double>(p.left_pad),
          static_cast<double>(p.right_pad),
          p.fmin,
          p.fmax};
}

ConfigFeatureVector EncodeConfigFeatures(const NonNormalizableParams& p) {
  ConfigFeatureVector f = RawConfigFeatures(p);
  static const double kLnWinLo = std::log(800.0);
  static const double kLnWinHi = std::log(1200.0);
  static const double kLnHopLo = std::log(200.0);
  static const double kLnHopHi = std::log(300.0);
  f[0] = (f[0] - 0.9) / 0.1;
  f[1] = f[1] / 2048.0;
  f[2] = (f[2] - kLnWinLo) / (kLnWinHi - kLnWinLo);
  f[3] = (f[3] - kLnHopLo) / (kLnHopHi - kLnHopLo);
  f[4] = f[4] / 1024.0;
  f[5] = f[5] / 1024.0;
  f[6] = f[6] / 90.0;
  f[7] = f[7] / 12000.0;
  return f;
}

MelConfig SampleRandomConfig(std::mt19937_64& rng,
                             std::span<const MelConfig> exclude,
                             int max_attempts) {
  static constexpr int kNfft[] = {1024, 2048};
  static constexpr int kWin[] = {800, 900, 1024, 1100, 1200};
  static constexpr double kFmin[] = {0, 30, 50, 70, 90};
  static constexpr double kFmax[] = {7600, 8000, 9500, 11025};
  static constexpr bool kBool[] = {true, false};
  static constexpr LogBase kBase[] = {LogBase::kTen, LogBase::kE};
  static constexpr int kFactor[] = {20, 1};

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    MelConfig c;
    c.sample_rate = 22050;
    c.n_mels = 80;
    c.wave_peak_norm = UniformRange(rng, 0.9, 1.0);
    c.n_fft = Pick<int>(rng, kNfft);
    c.win_length = Pick<int>(rng, kWin);
    c.hop_length = c.win_length / 4;
    const int center_pad = (c.n_fft - c.hop_length) / 2;
    c.left_pad = UniformIndex(rng, 2) == 0 ? 0 : center_pad;
    c.right_pad = UniformIndex(rng, 2) == 0 ? 0 : center_pad;
    c.fmin = Pick<double>(rng, kFmin);
    c.fmax = Pick<double>(rng, kFmax);
    c.amp_to_db = Pick<bool>(rng, kBool);
    c.log_base = Pick<LogBase>(rng, kBase);
    c.log_factor = Pick<int>(rng, kFactor);
    c.normalize_mel = Pick<bool>(rng, kBool);
    c.ref_level_db = 0.0;
    c.min_level_db = -100.0;

    if (c.win_length > c.n_fft) continue;
    if (c.normalize_mel && !c.amp_to_db) continue;
    bool excluded = false;
    for (const auto& e : exclude) excluded = excluded || e == c;
    if (excluded) continue;
    ValidateConfig(c);
    return c;
  }
  throw std::runtime_error("SampleRandomConfig: no admissible config after " +
                           std::to_string(max_attempts) + " attempts");
}

}  // namespace melbridge
