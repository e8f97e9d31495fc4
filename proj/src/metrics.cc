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

#include "melbridge/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "melbridge/errors.h"
#include "melbridge/mel.h"

namespace melbridge {

namespace {

RowMatrix DctBasis(int n, int first, int count) {
  RowMatrix basis(count, n);
  for (int k = 0; k < count; ++k) {
    const int kk = first + k;
    const double scale = std::sqrt((kk == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) {
      basis(k, i) = scale * std::cos(M_PI * kk * (2 * i + 1) / (2.0 * n));
    }
  }
  return basis;
}

void CheckRates(const Waveform& a, const Waveform& b) {
  if (a.sample_rate != b.sample_rate) {
    throw InvalidInput("metrics: sample rates differ (" + std::to_string(a.sample_rate) +
                       " vs " + std::to_string(b.sample_rate) + ")");
  }
}

}  // namespace

MelConfig CepstralAnalysisConfig(int sample_rate) {
  MelConfig cfg;
  cfg.sample_rate = sample_rate;
  cfg.n_mels = 80;
  cfg.n_fft = 1024;
  cfg.win_length = 1024;
  cfg.hop_length = 256;
  cfg.left_pad = 384;
  cfg.right_pad = 384;
  cfg.fmin = 0.0;
  cfg.fmax = sample_rate / 2.0;
  return cfg;
}

RowMatrix MelCepstra(const Waveform& w, int order) {
  if (w.empty()) throw InvalidInput("MelCepstra: empty waveform");
  if (order < 1 || order >= 80) throw InvalidInput("MelCepstra: order must be in [1, 79]");
  const MelConfig cfg = CepstralAnalysisConfig(w.sample_rate);
  const StftGeometry g = StftGeometry::FromConfig(cfg);
  if (g.NumFrames(w.size()) == 0) return RowMatrix(0, order);
  const MelFilterbank fb = MelFilterbank::FromConfig(cfg);
  RowMatrix log_mel = fb.Apply(Magnitude(Stft(w, g)).magnitudes);
  log_mel = log_mel.cwiseMax(kAmplitudeFloor).array().log().matrix();
  return log_mel * DctBasis(cfg.n_mels, 1, order).transpose();
}

int CommonCepstralFrames(const Waveform& a, const Waveform& b) {
  const StftGeometry g = StftGeometry::FromConfig(CepstralAnalysisConfig(a.sample_rate));
  return std::min(g.NumFrames(a.size()), g.NumFrames(b.size()));
}

double MelCepstralDistortion(const Waveform& a, const Waveform& b) {
  CheckRates(a, b);
  const RowMatrix ca = MelCepstra(a), cb = MelCepstra(b);
  const Eigen::Index frames = std::min(ca.rows(), cb.rows());
  if (frames == 0) throw InvalidInput("MelCepstralDistortion: no common frames");
  double sum = 0.0;
  for (Eigen::Index f = 0; f < frames; ++f) sum += (ca.row(f) - cb.row(f)).norm();
  return 10.0 / M_LN10 * std::sqrt(2.0) * sum / static_cast<double>(frames);
}

F0Track EstimateF0(const Waveform& w, const YinOptions& o) {
  const int sr = w.sample_rate;
  const int win = static_cast<int>(std::lround(o.window_seconds * sr));
  const int hop = static_cast<int>(std::lround(o.hop_seconds * sr));
  const int tau_min = std::max(2, static_cast<int>(std::floor(sr / o.max_hz)));
  const int tau_max = static_cast<int>(std::ceil(sr / o.min_hz));
  F0Track track;
  track.hop = hop;
  const long span = static_cast<long>(win) + tau_max + 1;
  const long n = static_cast<long>(w.size());
  if (n < span) return track;
  const long frames = (n - span) / hop + 1;
  track.f0.assign(frames, 0.0);
  track.voiced.assign(frames, false);
  std::vector<double> d(tau_max + 2), cmnd(tau_max + 2);
  const double* x = w.samples.data();
  for (long f = 0; f < frames; ++f) {
    const double* s = x + f * hop;
    double power = 0.0;
    for (int j = 0; j < win; ++j) power += s[j] * s[j];
    if (power / win < o.silence_power) continue;
    double running = 0.0;
    cmnd[0] = 1.0;
    for (int tau = 1; tau <= tau_max + 1; ++tau) {
      double acc = 0.0;
      for (int j = 0; j < win; ++j) {
        const double diff = s[j] - s[j + tau];
        acc += diff * diff;
      }
      d[tau] = acc;
      running += acc;
      cmnd[tau] = running > 0.0 ? acc * tau / running : 1.0;
    }
    int best = -1;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
      if (cmnd[tau] < o.threshold) {
        while (tau + 1 <= tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
        best = tau;
        break;
      }
    }
    if (best < 0) continue;
    double refined = best;
    const double a = cmnd[best - 1], b = cmnd[best], c = cmnd[best + 1];
    const double denom = a - 2.0 * b + c;
    if (denom > 0.0) refined += 0.5 * (a - c) / denom;
    const double hz = sr / refined;
    if (hz < o.min_hz || hz > o.max_hz) continue;
    track.f0[f] = hz;
    track.voiced[f] = true;
  }
  return track;
}

std::optional<double> F0Rmse(const F0Track& a, const F0Track& b) {
  const std::size_t n = std::min(a.f0.size(), b.f0.size());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!a.voiced[i] || !b.voiced[i]) continue;
    const double d = a.f0[i] - b.f0[i];
    sum += d * d;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return std::sqrt(sum / static_cast<double>(count));
}

double VuvErrorPercent(const F0Track& a, const F0Track& b) {
  const std::size_t n = std::min(a.voiced.size(), b.voiced.size());
  if (n == 0) throw InvalidInput("VuvErrorPercent: no common frames");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) wrong += a.voiced[i] != b.voiced[i];
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(n);
}

}  // namespace melbridge
