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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace aqem {

/// Inputs of the small-noise sample-count formulas.
struct ComplexityInputs {
  double n_modes = 1.0;         // N_m
  double shots = 1.0;           // N_k, per time point
  double n_paulis = 1.0;        // N_P
  std::size_t length = 2000;    // L
  double dt = 1e-4;             // time step
  double noise_strength = 0.0;  // |Dtilde|
  double d_ab = 1.0;            // normalized decay coefficient
  std::optional<double> c_amp;  // |C_alpha|; defaults to 1 / N_m
  double sigma_target = 1e-3;   // target std of the mitigated energy
  double c1 = 2.0;
  std::optional<double> c2;
  double c_stat = 0.0;          // twirled-bias variance constant

  double horizon() const { return static_cast<double>(length) * dt; }
  double amplitude() const { return c_amp.value_or(1.0 / n_modes); }
  /// x = d_ab |Dtilde| T.
  double x() const { return d_ab * noise_strength * horizon(); }
  void validate() const;
};

/// f(x) = ((1 - e^{-2x}(1 + 2x + 2x^2)) / (4 x^3))^{-1/2}, x > 0. Uses
/// sqrt(3) + 3 sqrt(3) x / 4 for x <= 1e-6 and a cancellation-free series
/// for the numerator when 2x < 2.
double f_factor(double x);

/// F(c1, c2) = sqrt((c2-c1)^2 + (c1-1)^2 + (c2-1)^2)
///             / (|1/c1 - 1/c2| (c1-1)(c2-1)).
double big_f(double c1, double c2);

/// Phase standard deviation (2 N_k C^2 sum_{k<L} k^2 r^{2k})^{-1/2} from the
/// closed-form sum, 0 < r < 1. Falls back to direct summation when
/// (1 - r^2) L < 1/4, where the closed form cancels badly.
double sigma_omega(double shots, double c_amp, double r, std::size_t length);

/// The same quantity by direct summation in extended precision.
double sigma_omega_direct(double shots, double c_amp, double r,
                          std::size_t length);

enum class ComplexityStrategy { reshape_sampled, reshape_full, rescale_first, rescale_second };

std::string to_string(ComplexityStrategy s);
ComplexityStrategy parse_complexity_strategy(std::string_view text);

///
/// Total sample count N_T with f = f(d_ab |Dtilde| T):
///   reshape_full    f^2 N_m^2 / (T^2 sigma^2)
///   reshape_sampled f^2 N_m^2 / (T^2 (sigma^2 - C |Dtilde|^2 / N_P))
///   rescale_first   4 c1^2 / (c1-1)^2 * reshape_full
///   rescale_second  3 F(c1, c2)^2 * reshape_full
/// Throws std::invalid_argument when reshape_sampled is infeasible.
///
double total_samples(ComplexityStrategy strategy, const ComplexityInputs &in);

/// Large-noise advisory N_m^2 L e^{2 d_ab |Dtilde| dt} / (2 sigma_omega^2)
/// with sigma_omega = sigma_target * dt.
double exponential_regime_samples(const ComplexityInputs &in);

}  // namespace aqem
