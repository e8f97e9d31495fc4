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

#ifndef MELBRIDGE_SRC_FFT_H_
#define MELBRIDGE_SRC_FFT_H_

#include <complex>

namespace melbridge::internal {

// One-sided real DFT of length n backed by FFTW. Plans are created once per
// size under a lock and executed lock-free, so instances may be used from
// several threads. Buffers are owned per instance.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }

  // Time buffer of n reals and spectrum buffer of n/2+1 bins.
  double* time() { return time_; }
  std::complex<double>* freq() { return freq_; }

  void Forward();  // time -> freq, unnormalized
  void Inverse();  // freq -> time, scaled by 1/n

 private:
  int n_;
  double* time_;
  std::complex<double>* freq_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace melbridge::internal

#endif  // MELBRIDGE_SRC_FFT_H_
