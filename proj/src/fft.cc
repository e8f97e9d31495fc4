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

#include "fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace melbridge::internal {

namespace {

std::mutex& PlanMutex() {
  static auto* mu = new std::mutex;
  return *mu;
}

// Plans keyed by size. FFTW_ESTIMATE keeps planning deterministic; all
// buffers come from fftw_alloc so the alignment matches at execution.
std::pair<fftw_plan, fftw_plan> PlansFor(int n) {
  static auto* cache = new std::map<int, std::pair<fftw_plan, fftw_plan>>;
  std::lock_guard<std::mutex> lock(PlanMutex());
  auto it = cache->find(n);
  if (it != cache->end()) return it->second;
  double* t = fftw_alloc_real(n);
  fftw_complex* f = fftw_alloc_complex(n / 2 + 1);
  fftw_plan fwd = fftw_plan_dft_r2c_1d(n, t, f, FFTW_ESTIMATE);
  fftw_plan inv = fftw_plan_dft_c2r_1d(n, f, t, FFTW_ESTIMATE);
  fftw_free(t);
  fftw_free(f);
  it = cache->emplace(n, std::make_pair(fwd, inv)).first;
  return it->second;
}

}  // namespace

RealFft::RealFft(int n) : n_(n) {
  auto plans = PlansFor(n);
  forward_plan_ = plans.first;
  inverse_plan_ = plans.second;
  time_ = fftw_alloc_real(n);
  freq_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n / 2 + 1));
}

RealFft::~RealFft() {
  fftw_free(time_);
  fftw_free(freq_);
}

void RealFft::Forward() {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), time_,
                       reinterpret_cast<fftw_complex*>(freq_));
}

void RealFft::Inverse() {
  // c2r destroys its input; callers treat freq() as scratch afterwards.
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(freq_), time_);
  const double scale = 1.0 / n_;
  for (int i = 0; i < n_; ++i) time_[i] *= scale;
}

}  // namespace melbridge::internal
