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

#include "melbridge/stage1.h"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>

#include <Eigen/SVD>

#include "melbridge/errors.h"
#include "melbridge/normalizer.h"

namespace melbridge {

namespace {

constexpr double kPinvRelativeThreshold = 1e-8;

}  // namespace

RowMatrix PseudoInverse(const MelFilterbank& fb) {
  const Eigen::MatrixXd a = fb.weights();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = s(0) * kPinvRelativeThreshold;
  Eigen::VectorXd inv_s(s.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) {
      inv_s(i) = 1.0 / s(i);
      ++rank;
    } else {
      inv_s(i) = 0.0;
    }
  }
  if (rank < fb.n_mels()) {
    throw InvalidInput("PseudoInverse: degenerate filterbank (rank " +
                       std::to_string(rank) + " < " + std::to_string(fb.n_mels()) + ")");
  }
  return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
}

const RowMatrix& CachedPseudoInverse(const MelConfig& cfg) {
  using Key = std::tuple<int, int, int, double, double>;
  static auto* mu = new std::mutex;
  static auto* cache = new std::map<Key, std::unique_ptr<RowMatrix>>;
  const Key key{cfg.sample_rate, cfg.n_fft, cfg.n_mels, cfg.fmin, cfg.fmax};
  std::lock_guard<std::mutex> lock(*mu);
  auto& slot = (*cache)[key];
  if (!slot) {
    slot = std::make_unique<RowMatrix>(PseudoInverse(MelFilterbank::FromConfig(cfg)));
  }
  return *slot;
}

LinearSpectrogram MelToLinear(const RowMatrix& mel_amplitude,
                              const RowMatrix& pinv,
                              const StftGeometry& geometry, int sample_rate) {
  if (mel_amplitude.cols() != pinv.cols() || pinv.rows() != geometry.NumBins()) {
    throw InvalidInput("MelToLinear: shape mismatch between mel, pseudo-inverse and geometry");
  }
  LinearSpectrogram out;
  out.geometry = geometry;
  out.sample_rate = sample_rate;
  out.magnitudes = (mel_amplitude * pinv.transpose()).cwiseMax(0.0);
  return out;
}

double SpectralInconsistency(const RowMatrix& magnitudes, const RowMatrix& target,
                             int n_fft) {
  const Eigen::Index bins = target.cols();
  const bool has_nyquist = n_fft % 2 == 0;
  double num = 0.0, den = 0.0;
  for (Eigen::Index f = 0; f < target.rows(); ++f) {
    for (Eigen::Index k = 0; k < bins; ++k) {
      const double weight =
          (k == 0 || (has_nyquist && k == bins - 1)) ? 1.0 : 2.0;
      const double d = magnitudes(f, k) - target(f, k);
      num += weight * d * d;
      den += weight * target(f, k) * target(f, k);
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

GriffinLimState::GriffinLimState(LinearSpectrogram target)
    : target_(std::move(target)),
      phases_(RowMatrix::Zero(target_.magnitudes.rows(), target_.magnitudes.cols())) {
  if (target_.magnitudes.cols() != target_.geometry.NumBins()) {
    throw InvalidInput("GriffinLim: magnitude bins do not match the geometry");
  }
  if ((target_.magnitudes.array() < 0.0).any()) {
    throw InvalidInput("GriffinLim: magnitudes must be non-negative");
  }
}

ComplexSpectrogram GriffinLimState::Current() const {
  ComplexSpectrogram spec;
  spec.geometry = target_.geometry;
  spec.sample_rate = target_.sample_rate;
  spec.bins.resize(phases_.rows(), phases_.cols());
  for (Eigen::Index i = 0; i < phases_.size(); ++i) {
    spec.bins.data()[i] =
        std::polar(target_.magnitudes.data()[i], phases_.data()[i]);
  }
  return spec;
}

Waveform GriffinLimState::CurrentWaveform() const { return Istft(Current()); }

void GriffinLimState::Step() {
  const Waveform x = CurrentWaveform();
  const ComplexSpectrogram s = Stft(x, target_.geometry);
  const Eigen::Index frames = std::min<Eigen::Index>(s.bins.rows(), phases_.rows());
  RowMatrix mags = RowMatrix::Zero(phases_.rows(), phases_.cols());
  for (Eigen::Index f = 0; f < frames; ++f) {
    for (Eigen::Index k = 0; k < phases_.cols(); ++k) {
      const std::complex<double> c = s.bins(f, k);
      mags(f, k) = std::abs(c);
      phases_(f, k) = std::arg(c);
    }
  }
  consistency_.push_back(SpectralInconsistency(mags, target_.magnitudes, target_.geometry.n_fft));
  ++iteration_;
}

GriffinLimResult GriffinLim(const LinearSpectrogram& spec,
                            const GriffinLimOptions& options) {
  GriffinLimResult result;
  if (spec.magnitudes.size() == 0 || spec.magnitudes.maxCoeff() == 0.0) {
    GriffinLimState check(spec);  // validates geometry and sign
    result.waveform.sample_rate = spec.sample_rate;
    result.waveform.samples.assign(spec.geometry.SynthesisLength(spec.frames()), 0.0);
    return result;
  }
  GriffinLimState state(spec);
  for (int i = 0; i < options.iterations; ++i) {
    state.Step();
    if (options.progress &&
        !options.progress(state.iteration(), state.consistency().back())) {
      result.cancelled = true;
      break;
    }
  }
  result.waveform = state.CurrentWaveform();
  result.consistency = state.consistency();
  result.iterations_run = state.iteration();
  return result;
}

Waveform IntermediateWaveform(const MelSpectrogram& m_src,
                              const GriffinLimOptions& options) {
  const MelConfig& cfg = m_src.config;
  const MelSpectrogram base = ToBase(m_src);
  const double floor_log = std::log(kAmplitudeFloor);
  RowMatrix amplitude(base.values.rows(), base.values.cols());
  for (Eigen::Index i = 0; i < amplitude.size(); ++i) {
    const double x = base.values.data()[i];
    // Values at the dB floor carry no signal.
    amplitude.data()[i] = x <= floor_log + 1e-9 ? 0.0 : std::exp(x);
  }
  const StftGeometry geometry = StftGeometry::FromConfig(cfg);
  const LinearSpectrogram linear =
      MelToLinear(amplitude, CachedPseudoInverse(cfg), geometry, cfg.sample_rate);
  Waveform w = GriffinLim(linear, options).waveform;
  w.samples.resize(w.samples.size() + cfg.hop_length / 2, 0.0);
  return w;
}

MelSpectrogram ApproximateConvert(const MelSpectrogram& m_src,
                                  const MelConfig& cfg_tgt,
                                  const GriffinLimOptions& options) {
  ValidateConfig(cfg_tgt);
  Waveform w = IntermediateWaveform(m_src, options);
  if (w.sample_rate != cfg_tgt.sample_rate) w = Resample(w, cfg_tgt.sample_rate);
  return ExtractMel(w, cfg_tgt);
}

}  // namespace melbridge
