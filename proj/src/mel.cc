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

#include "melbridge/mel.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "binary_io.h"
#include "melbridge/errors.h"

namespace melbridge {

namespace {

// Slaney scale: linear below 1 kHz (200/3 Hz per mel), logarithmic above.
constexpr double kSlaneyHzPerMel = 200.0 / 3.0;
constexpr double kSlaneyBreakHz = 1000.0;
constexpr double kSlaneyBreakMel = kSlaneyBreakHz / kSlaneyHzPerMel;
const double kSlaneyLogStep = std::log(6.4) / 27.0;

}  // namespace

double HzToMel(double hz, MelScale scale) {
  if (scale == MelScale::kHtk) return 2595.0 * std::log10(1.0 + hz / 700.0);
  if (hz < kSlaneyBreakHz) return hz / kSlaneyHzPerMel;
  return kSlaneyBreakMel + std::log(hz / kSlaneyBreakHz) / kSlaneyLogStep;
}

double MelToHz(double mel, MelScale scale) {
  if (scale == MelScale::kHtk) return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
  if (mel < kSlaneyBreakMel) return mel * kSlaneyHzPerMel;
  return kSlaneyBreakHz * std::exp(kSlaneyLogStep * (mel - kSlaneyBreakMel));
}

MelFilterbank::MelFilterbank(int sample_rate, int n_fft, int n_mels,
                             double fmin, double fmax, MelScale scale)
    : sample_rate_(sample_rate),
      n_fft_(n_fft),
      fmin_(fmin),
      fmax_(fmax),
      scale_(scale) {
  if (sample_rate < 1 || n_fft < 2 || n_mels < 1) {
    throw InvalidInput("MelFilterbank: sample_rate, n_fft and n_mels must be positive");
  }
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw InvalidInput("MelFilterbank: need 0 <= fmin < fmax <= sample_rate/2");
  }
  const int bins = n_fft / 2 + 1;
  const double mel_lo = HzToMel(fmin, scale);
  const double mel_hi = HzToMel(fmax, scale);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1), scale);
  }
  weights_ = RowMatrix::Zero(n_mels, bins);
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    const double area_norm = 2.0 / (hi - lo);
    bool any = false;
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      const double rise = (f - lo) / (mid - lo);
      const double fall = (hi - f) / (hi - mid);
      const double v = std::max(0.0, std::min(rise, fall));
      if (v > 0.0) {
        weights_(m, k) = v * area_norm;
        any = true;
      }
    }
    if (!any) {
      throw InvalidInput("MelFilterbank: filter " + std::to_string(m) +
                         " covers no FFT bin; too many filters (" +
                         std::to_string(n_mels) + ") for n_fft " +
                         std::to_string(n_fft) + " over [" +
                         std::to_string(fmin) + ", " + std::to_string(fmax) + "] Hz");
    }
  }
}

MelFilterbank MelFilterbank::FromConfig(const MelConfig& cfg, MelScale scale) {
  return MelFilterbank(cfg.sample_rate, cfg.n_fft, cfg.n_mels, cfg.fmin,
                       cfg.fmax, scale);
}

std::vector<double> MelFilterbank::CenterFrequencies() const {
  const int n = n_mels();
  const double mel_lo = HzToMel(fmin_, scale_);
  const double mel_hi = HzToMel(fmax_, scale_);
  std::vector<double> out(n);
  for (int m = 0; m < n; ++m) {
    out[m] = MelToHz(mel_lo + (mel_hi - mel_lo) * (m + 1) / (n + 1), scale_);
  }
  return out;
}

RowMatrix MelFilterbank::Apply(const RowMatrix& magnitudes) const {
  if (magnitudes.cols() != weights_.cols()) {
    throw InvalidInput("MelFilterbank::Apply: expected " +
                       std::to_string(weights_.cols()) + " bins, got " +
                       std::to_string(magnitudes.cols()));
  }
  return magnitudes * weights_.transpose();
}

double LogBaseValue(LogBase base) {
  return base == LogBase::kTen ? 10.0 : M_E;
}

double AmpToDb(double v, LogBase base, int factor) {
  const double l = std::log(std::max(v, kAmplitudeFloor));
  return base == LogBase::kTen ? factor * (l / M_LN10) : factor * l;
}

double DbToAmp(double db, LogBase base, int factor) {
  const double x = db / factor;
  return base == LogBase::kTen ? std::pow(10.0, x) : std::exp(x);
}

std::uint8_t ValueSpace::Tag() const {
  if (kind == ValueSpaceKind::kLinearAmplitude) return 0;
  std::uint8_t tag = static_cast<std::uint8_t>(kind);
  if (log_base == LogBase::kE) tag |= 0x4;
  if (log_factor == 1) tag |= 0x8;
  return tag;
}

ValueSpace ValueSpace::FromTag(std::uint8_t tag) {
  const std::uint8_t kind = tag & 0x3;
  if (kind > 2 || (tag & 0xF0) != 0 || (kind == 0 && tag != 0)) {
    throw IoError("unknown value-space tag " + std::to_string(tag));
  }
  if (kind == 0) return {ValueSpaceKind::kLinearAmplitude, LogBase::kE, 1};
  return {static_cast<ValueSpaceKind>(kind),
          (tag & 0x4) ? LogBase::kE : LogBase::kTen, (tag & 0x8) ? 1 : 20};
}

ValueSpace ValueSpaceFor(const NormalizableParams& p) {
  if (!p.amp_to_db) return {ValueSpaceKind::kLinearAmplitude, LogBase::kE, 1};
  return {p.normalize_mel ? ValueSpaceKind::kNormalized : ValueSpaceKind::kDb,
          p.log_base, p.log_factor};
}

std::string ToString(const ValueSpace& v) {
  if (v.kind == ValueSpaceKind::kLinearAmplitude) return "linear";
  std::string s = v.kind == ValueSpaceKind::kDb ? "db" : "normalized";
  s += v.log_base == LogBase::kTen ? "(log10," : "(ln,";
  s += std::to_string(v.log_factor) + ")";
  return s;
}

MelSpectrogram ExtractMel(const Waveform& w, const MelConfig& cfg) {
  if (w.empty()) throw InvalidInput("ExtractMel: empty waveform");
  if (w.sample_rate != cfg.sample_rate) {
    throw InvalidInput("ExtractMel: waveform is " + std::to_string(w.sample_rate) +
                       " Hz but config expects " + std::to_string(cfg.sample_rate) +
                       " Hz; resample first");
  }
  const Waveform normalized = PeakNormalize(w, cfg.wave_peak_norm);
  const LinearSpectrogram lin =
      Magnitude(Stft(normalized, StftGeometry::FromConfig(cfg)));
  const MelFilterbank fb = MelFilterbank::FromConfig(cfg);

  MelSpectrogram out;
  out.config = cfg;
  out.space = ValueSpaceFor(SplitConfig(cfg).normalizable);
  out.values = fb.Apply(lin.magnitudes);
  if (cfg.amp_to_db) {
    for (double& v : out.values.reshaped()) {
      v = AmpToDb(v, cfg.log_base, cfg.log_factor);
    }
  }
  if (cfg.normalize_mel) {
    for (double& v : out.values.reshaped()) {
      v = std::clamp((v - cfg.ref_level_db - cfg.min_level_db) / -cfg.min_level_db,
                     0.0, 1.0);
    }
  }
  return out;
}

std::string EncodeMelFile(const MelSpectrogram& m) {
  using internal::PutF32;
  using internal::PutU32;
  const std::string doc = SerializeConfig(m.config);
  std::string out = "MELT";
  PutU32(out, kMelFileVersion);
  PutU32(out, static_cast<std::uint32_t>(m.n_mels()));
  PutU32(out, static_cast<std::uint32_t>(m.frames()));
  internal::PutU8(out, m.space.Tag());
  PutU32(out, static_cast<std::uint32_t>(doc.size()));
  out += doc;
  out.reserve(out.size() + 4 * m.values.size());
  for (double v : m.values.reshaped<Eigen::RowMajor>()) {
    PutF32(out, static_cast<float>(v));
  }
  return out;
}

MelSpectrogram DecodeMelFile(const std::string& bytes) {
  internal::ByteReader r(bytes, "MELT");
  if (r.Bytes(4) != "MELT") throw IoError("MELT: bad magic");
  const auto version = r.Get<std::uint32_t>();
  if (version != kMelFileVersion) {
    throw IoError("MELT: unsupported version " + std::to_string(version));
  }
  const auto n_mels = r.Get<std::uint32_t>();
  const auto n_frames = r.Get<std::uint32_t>();
  MelSpectrogram m;
  m.space = ValueSpace::FromTag(r.Get<std::uint8_t>());
  const auto doc_len = r.Get<std::uint32_t>();
  m.config = ParseConfig(r.Bytes(doc_len));
  if (static_cast<int>(n_mels) != m.config.n_mels) {
    throw IoError("MELT: header n_mels disagrees with embedded config");
  }
  if (r.remaining() != 4ull * n_mels * n_frames) {
    throw IoError("MELT: payload size does not match header");
  }
  m.values.resize(n_frames, n_mels);
  for (double& v : m.values.reshaped<Eigen::RowMajor>()) v = r.Get<float>();
  return m;
}

void WriteMelFile(const MelSpectrogram& m, const std::string& path) {
  internal::WriteFileBytes(path, EncodeMelFile(m));
}

MelSpectrogram ReadMelFile(const std::string& path) {
  return DecodeMelFile(internal::ReadFileBytes(path));
}

}  // namespace melbridge
