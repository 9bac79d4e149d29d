// Copyright 2026 The aqem Authors
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

#pragma once

#include <complex>
#include <vector>

namespace aqem {

/// Sampled expectation values y_k = <O>(k dt), k = 0 .. L-1.
struct TimeSeries {
  double dt = 0.0;
  std::vector<std::complex<double>> samples;

  std::size_t size() const { return samples.size(); }
  /// Throws std::invalid_argument unless dt > 0, L >= 2 and all finite.
  void validate() const;
};

/// One term C r^k e^{i omega k} of a damped oscillation signal.
struct DampedMode {
  std::complex<double> amplitude{0.0, 0.0};
  double decay = 1.0;  // r >= 0, per step
  double phase = 0.0;  // omega in (-pi, pi], per step

  std::complex<double> pole() const { return std::polar(decay, phase); }
  static DampedMode from_pole(std::complex<double> amplitude,
                              std::complex<double> pole);
};

/// Sum of modes sampled at k = 0 .. length-1. Requires r >= 0 for each mode.
TimeSeries synth_series(const std::vector<DampedMode> &modes, double dt,
                        std::size_t length);

}  // namespace aqem
