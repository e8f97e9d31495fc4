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

#include "melbridge/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "binary_io.h"
#include "melbridge/errors.h"

namespace melbridge {

namespace {

constexpr int kResampleZeroCrossings = 16;
constexpr double kResampleRolloff = 0.97;
constexpr double kKaiserBeta = 8.6;

double Sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

double Kaiser(double x, double half_width) {
  const double r = x / half_width;
  if (std::abs(r) > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) /
         std::cyl_bessel_i(0.0, kKaiserBeta);
}

}  // namespace

double MaxAbs(const Waveform& w) {
  double m = 0.0;
  for (double s : w.samples) m = std::max(m, std::abs(s));
  return m;
}

Waveform PeakNormalize(const Waveform& w, double peak, bool* silent) {
  const double m = MaxAbs(w);
  if (silent != nullptr) *silent = (m == 0.0);
  if (m == 0.0) return w;
  Waveform out = w;
  const double gain = peak / m;
  for (double& s : out.samples) s *= gain;
  return out;
}

// Polyphase windowed-sinc resampler. For up/down factors L/M (reduced),
// output sample j sits at input position j*M/L; its fractional part is one
// of L phases, each with a precomputed Kaiser-windowed sinc filter.
Waveform Resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0 || w.sample_rate <= 0) {
    throw InvalidInput("Resample: sample rates must be positive");
  }
  if (target_rate == w.sample_rate) return w;
  const long g = std::gcd(w.sample_rate, target_rate);
  const long up = target_rate / g;
  const long down = w.sample_rate / g;

  const double cutoff =
      kResampleRolloff * std::min(1.0, static_cast<double>(up) / down);
  const double half_width = kResampleZeroCrossings / cutoff;
  const int taps_per_side = static_cast<int>(std::ceil(half_width));
  const int taps = 2 * taps_per_side;

  // filters[p][t] weights input index base - taps_per_side + 1 + t, where
  // the output position is base + p/up.
  std::vector<double> filters(static_cast<std::size_t>(up) * taps);
  for (long p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / up;
    for (int t = 0; t < taps; ++t) {
      const double x = (t - taps_per_side + 1) - frac;
      filters[p * taps + t] = cutoff * Sinc(cutoff * x) * Kaiser(x, half_width);
    }
  }

  const long n_in = static_cast<long>(w.size());
  const long n_out = std::lround(static_cast<double>(n_in) * up / down);
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  for (long j = 0; j < n_out; ++j) {
    const long num = j * down;
    const long base = num / up;
    const long phase = num % up;
    const double* h = &filters[phase * taps];
    double acc = 0.0;
    const long first = base - taps_per_side + 1;
    for (int t = 0; t < taps; ++t) {
      const long idx = first + t;
      if (idx >= 0 && idx < n_in) acc += h[t] * w.samples[idx];
    }
    out.samples[j] = acc;
  }
  return out;
}

std::string EncodeWav(const Waveform& w) {
  using internal::PutU16;
  using internal::PutU32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  PutU32(out, 16);
  PutU16(out, 1);  // PCM
  PutU16(out, 1);  // mono
  PutU32(out, static_cast<std::uint32_t>(w.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (double s : w.samples) {
    const double scaled = std::round(s * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    out.append(reinterpret_cast<const char*>(&v), 2);
  }
  return out;
}

Waveform DecodeWav(const std::string& bytes) {
  internal::ByteReader r(bytes, "wav");
  if (r.Bytes(4) != "RIFF") throw IoError("wav: missing RIFF header");
  r.Get<std::uint32_t>();
  if (r.Bytes(4) != "WAVE") throw IoError("wav: missing WAVE tag");

  bool have_fmt = false;
  Waveform out;
  while (r.remaining() >= 8) {
    const std::string_view id = r.Bytes(4);
    const std::uint32_t size = r.Get<std::uint32_t>();
    if (id == "fmt ") {
      internal::ByteReader f(r.Bytes(size), "wav fmt");
      const auto format = f.Get<std::uint16_t>();
      const auto channels = f.Get<std::uint16_t>();
      out.sample_rate = static_cast<int>(f.Get<std::uint32_t>());
      f.Get<std::uint32_t>();
      f.Get<std::uint16_t>();
      const auto bits = f.Get<std::uint16_t>();
      if (format != 1 || bits != 16) {
        throw InvalidInput("wav: only 16-bit PCM is supported");
      }
      if (channels != 1) throw InvalidInput("wav: only mono is supported");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError("wav: data chunk before fmt chunk");
      const std::string_view data = r.Bytes(size);
      out.samples.resize(size / 2);
      for (std::size_t i = 0; i < out.samples.size(); ++i) {
        std::int16_t v;
        std::memcpy(&v, data.data() + 2 * i, 2);
        out.samples[i] = v / 32768.0;
      }
      return out;
    } else {
      r.Bytes(size + (size & 1));
    }
  }
  throw IoError("wav: no data chunk");
}

Waveform ReadWav(const std::string& path) {
  return DecodeWav(internal::ReadFileBytes(path));
}

void WriteWav(const Waveform& w, const std::string& path) {
  internal::WriteFileBytes(path, EncodeWav(w));
}

}  // namespace melbridge
