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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "aqem/operators.hpp"
#include "aqem/signal.hpp"

namespace aqem {

// Superoperators act on column-stacked operators:
//   vec(A rho B) = (B^T kron A) vec(rho),  vec(rho)[i + j*d] = rho(i, j).

/// Measurement O = scale * |b><a| on the initial state (|a> + |b>)/sqrt(2).
struct PairObservable {
  CVector a_state;
  CVector b_state;
  double scale = 2.0;

  void validate() const;
  CMatrix matrix() const;
  /// (|a> + |b>) / sqrt(2).
  CVector initial_state() const;
};

/// Observable and initial state for the eigenpair (a, b) of `spectrum`.
PairObservable pair_observable(const Spectrum &spectrum, Eigen::Index a,
                               Eigen::Index b);

struct SpectroscopyConfig {
  double dt = 1e-4;
  std::size_t length = 2000;

  void validate() const;
  /// True when dt * max_gap >= pi, i.e. frequencies may alias.
  bool aliases(const Spectrum &spectrum) const;
};

enum class Backend { stepper, spectral };

std::string to_string(Backend backend);
Backend parse_backend(std::string_view text);

/// -i[H + h_err, .] + sum_k (L . L^+ - 1/2 {L^+ L, .}) as a d^2 x d^2 matrix.
CMatrix liouvillian_matrix(const CMatrix &H, const NoiseModel &noise);

/// The noise superoperator -i[h_err, X] + D[X], applied to an operator.
CMatrix apply_noise(const NoiseModel &noise, const CMatrix &X);

/// Hilbert-Schmidt adjoint of apply_noise.
CMatrix apply_noise_adjoint(const NoiseModel &noise, const CMatrix &X);

/// <a| Dtilde[|a><b|] |b>: first-order shift of the Liouvillian eigenvalue
/// that belongs to |a><b|.
Complex first_order_shift(const NoiseModel &noise, const CVector &a_state,
                          const CVector &b_state);

struct LiouvillianEigensystem {
  CVector eigenvalues;
  CMatrix modes;  // right eigenvectors as columns (vectorized operators)
  Eigen::PartialPivLU<CMatrix> modes_lu;
  double max_residual = 0.0;  // max_m |L M_m - Lambda_m M_m| / |L|

  /// Mode weights of a vectorized operator: solves modes * w = vec.
  CVector project(const CVector &vec) const { return modes_lu.solve(vec); }
};

/// Full right eigendecomposition. Throws NumericalError when the solver fails
/// or a mode residual exceeds 1e-8 |L|.
LiouvillianEigensystem liouvillian_eigensystem(const CMatrix &liouvillian);

/// Result of evolve_series: the samples and the achieved error estimate of
/// the backend (relative to max |y_k|).
struct SeriesResult {
  TimeSeries series;
  double error_estimate = 0.0;
};

///
/// Time evolution of one (H, noise) pair, prepared once and shared read-only
/// between series evaluations.
///
/// `stepper` precomputes exp(L dt) and iterates matrix-vector products.
/// `spectral` diagonalizes L; each series then costs one projection and
/// O(d^2 L) scalar exponentials.
///
class Propagator {
 public:
  virtual ~Propagator() = default;

  virtual Backend backend() const = 0;
  double dt() const { return dt_; }
  Eigen::Index dim() const { return dim_; }

  /// y_k = Tr(O rho(k dt)) for rho(0) = rho0.
  virtual SeriesResult series(const CMatrix &rho0, const CMatrix &observable,
                              std::size_t length) const = 0;
  /// rho(k dt).
  virtual CMatrix state_at(const CMatrix &rho0, std::size_t step) const = 0;

 protected:
  Propagator(double dt, Eigen::Index dim) : dt_(dt), dim_(dim) {}

 private:
  double dt_;
  Eigen::Index dim_;
};

std::unique_ptr<Propagator> make_propagator(const CMatrix &H,
                                            const NoiseModel &noise, double dt,
                                            Backend backend);

/// Relative tolerance every backend must meet on the samples.
inline constexpr double kSeriesTolerance = 1e-9;

/// Noisy many-body spectroscopy signal Tr(O rho(k dt)) from
/// rho(0) = |psi0><psi0|. Throws NumericalError with the achieved estimate
/// when the backend misses kSeriesTolerance.
TimeSeries evolve_series(const CMatrix &H, const NoiseModel &noise,
                         const CVector &initial_state,
                         const PairObservable &obs,
                         const SpectroscopyConfig &cfg,
                         Backend backend = Backend::spectral);

/// As above with a prepared propagator (its dt is used).
TimeSeries evolve_series(const Propagator &propagator,
                         const CVector &initial_state,
                         const PairObservable &obs, std::size_t length);

/// Perturbative Liouvillian eigenvalue for the mode |a><b|.
struct PerturbativePrediction {
  Complex lambda0;  // i E_ba
  Complex lambda1;
  Complex lambda2;
  double decay = 1.0;       // exp(Re lambda1 dt)
  double phase_bias = 0.0;  // Im lambda1 dt
  int excluded_terms = 0;   // near-degenerate denominators skipped in lambda2
  double max_excluded_coupling = 0.0;
  std::vector<std::string> warnings;
};

///
/// First- and second-order corrections to the eigenvalue i E_ba of
/// -i[H, .] under the noise superoperator. Second-order terms with
/// |E_ba - E_mp| < gap_threshold are skipped and counted; a negative
/// threshold selects the default 1e-8 * max|E|.
///
PerturbativePrediction perturbative_prediction(const Spectrum &spectrum,
                                               const NoiseModel &noise,
                                               Eigen::Index a, Eigen::Index b,
                                               double dt,
                                               double gap_threshold = -1.0);

/// Column-stacked vec and its inverse.
CVector vectorize(const CMatrix &m);
CMatrix unvectorize(const CVector &v, Eigen::Index dim);

}  // namespace aqem
