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

#include <string>
#include <string_view>
#include <vector>

#include "aqem/operators.hpp"
#include "aqem/signal.hpp"

namespace aqem {

struct MatrixPencilConfig {
  /// L_P; 0 selects floor(L / 3).
  std::size_t pencil_param = 0;
  /// Singular values at or below sigma_max * cutoff are discarded.
  double cutoff = 1e-10;

  std::size_t resolved_param(std::size_t length) const;
  /// Throws std::invalid_argument unless 0 < cutoff < 1 and
  /// 1 <= L_P <= L - 2.
  void validate(std::size_t length) const;
};

struct PencilDiagnostics {
  std::vector<double> singular_values;
  std::size_t retained = 0;
  double residual = 0.0;   // |y - y_model|_2 / |y|_2
  double condition = 0.0;  // Vandermonde condition estimate
  std::vector<std::string> warnings;
};

///
/// Matrix pencil retrieval of y_k ~ sum_j C_j z_j^k. Builds the
/// (L - L_P) x (L_P + 1) Hankel matrix, keeps M singular values above the
/// cutoff and takes the poles from the shifted right-singular subspace.
/// Amplitudes come from fit_amplitudes. Throws NumericalError when no
/// singular value survives or the shifted pencil is rank deficient.
///
std::vector<DampedMode> matrix_pencil(const TimeSeries &series,
                                      const MatrixPencilConfig &cfg,
                                      PencilDiagnostics *diag = nullptr);

/// Coarse frequencies from local maxima of |DFT|, strongest first.
/// Maxima below `rel_threshold` times the global maximum are dropped.
std::vector<double> dft_peak(const TimeSeries &series,
                             double rel_threshold = 1e-3);

struct AmplitudeFit {
  CVector amplitudes;
  double condition = 0.0;  // of the column-scaled Vandermonde matrix
  double residual = 0.0;   // |y - V C|_2 / |y|_2
  std::vector<std::string> warnings;
};

/// Least-squares amplitudes for known poles. Columns with |z| > 1 are scaled
/// by |z|^-(L-1) before the solve. A condition estimate above 1e12 is
/// reported as a warning.
AmplitudeFit fit_amplitudes(const TimeSeries &series,
                            const std::vector<std::complex<double>> &poles);

struct RefineResult {
  std::vector<DampedMode> modes;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool diverged = false;
};

///
/// Levenberg-Marquardt on sum_k w_k |y_k - sum_j C_j r_j^k e^{i w_j k}|^2
/// over (Re C, Im C, log r, omega). Stops when an accepted step lowers the
/// cost by a relative 1e-12 or less, or after 200 cost evaluations. Empty
/// `weights` means w_k = 1. On non-finite iterates the initial modes are
/// returned with `diverged` set.
///
RefineResult refine_least_squares(const TimeSeries &series,
                                  const std::vector<DampedMode> &init,
                                  const std::vector<double> &weights = {});

/// Mode of largest |C| (relative tie tolerance 1e-12), then smaller |omega|,
/// then larger r, then larger omega.
DampedMode select_mode(const std::vector<DampedMode> &modes);

enum class EstimateMethod { pencil, pencil_refine, dft };

std::string to_string(EstimateMethod method);
EstimateMethod parse_estimate_method(std::string_view text);

struct EstimatorConfig {
  MatrixPencilConfig pencil;
  EstimateMethod method = EstimateMethod::pencil;
  std::vector<double> weights;  // for refinement; empty = uniform
};

struct EnergyEstimate {
  double value = 0.0;  // mode.phase / dt
  DampedMode mode;
  EstimateMethod method = EstimateMethod::pencil;
  double residual = 0.0;
  std::size_t n_modes = 0;
  std::vector<std::string> warnings;
};

///
/// pencil: matrix pencil then select_mode.
/// pencil_refine: as pencil, then refine all retained modes jointly.
/// dft: strongest DFT peak as an undamped pole, amplitude fit, refinement.
///
EnergyEstimate estimate_energy(const TimeSeries &series,
                               const EstimatorConfig &cfg = {});

}  // namespace aqem
