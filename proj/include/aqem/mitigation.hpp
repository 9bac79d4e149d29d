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

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aqem/lindblad.hpp"
#include "aqem/operators.hpp"
#include "aqem/spectral.hpp"

namespace aqem {

/// Pauli strings used to reshape the Hamiltonian.
struct ReshapeSet {
  enum class Variant { full_pauli_sample, tensor_power_4, tensor_power_2, explicit_list };

  Variant variant = Variant::tensor_power_4;
  std::size_t count = 0;          // full_pauli_sample only
  std::uint64_t seed = 0;         // full_pauli_sample only
  std::vector<PauliString> strings;  // explicit_list only

  static ReshapeSet full_pauli_sample(std::size_t count, std::uint64_t seed);
  static ReshapeSet tensor_power_4();
  static ReshapeSet tensor_power_2();
  static ReshapeSet explicit_set(std::vector<PauliString> strings);

  /// The concrete strings for n qubits. full_pauli_sample draws `count`
  /// strings uniformly from all 4^n with replacement.
  std::vector<PauliString> realize(int n) const;
  void validate() const;
};

std::string to_string(ReshapeSet::Variant variant);
ReshapeSet::Variant parse_reshape_variant(std::string_view text);

/// Scale factors for rescaling and Richardson runs.
struct RescaleConfig {
  double c1 = 2.0;
  std::optional<double> c2;

  static constexpr double kMaxFactor = 20.0;

  /// c1 > 1, c2 > 1, c2 != c1, both <= kMaxFactor.
  void validate() const;
};

struct MitigatedEstimate {
  std::string strategy;
  std::vector<std::pair<std::string, EnergyEstimate>> raw;  // sorted by label
  double value = 0.0;
  std::vector<std::string> warnings;
};

/// Thrown when a constituent run fails; carries whatever finished.
class MitigationError : public NumericalError {
 public:
  MitigationError(const std::string &what, MitigatedEstimate partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const MitigatedEstimate &partial() const { return partial_; }

 private:
  MitigatedEstimate partial_;
};

struct ReshapedExperiment {
  CMatrix hamiltonian;
  CVector initial_state;
  PairObservable observable;
};

/// (P H P, P psi0, observable on P phi_a, P phi_b).
ReshapedExperiment reshape_experiment(const CMatrix &H, const CVector &psi0,
                                      const PairObservable &obs,
                                      const PauliString &p);

/// One constituent experiment of a mitigation strategy: the Hamiltonian
/// conjugated by `pauli`, divided by `factor`, sampled at factor * dt.
struct Constituent {
  PauliString pauli;
  double factor = 1.0;

  /// "base" for the unmodified experiment, "P:<string>" or "c:<factor>".
  std::string label() const;
};

/// The experiment a constituent runs: transformed Hamiltonian, state,
/// observable and sampling.
struct PreparedConstituent {
  CMatrix hamiltonian;
  CVector initial_state;
  PairObservable observable;
  SpectroscopyConfig cfg;
};

PreparedConstituent prepare_constituent(const CMatrix &H,
                                        const PairObservable &obs,
                                        const SpectroscopyConfig &cfg,
                                        const Constituent &constituent);

TimeSeries constituent_series(const CMatrix &H, const NoiseModel &noise,
                              const PairObservable &obs,
                              const SpectroscopyConfig &cfg,
                              const Constituent &constituent,
                              Backend backend = Backend::spectral);

/// Plain mean of the per-string energies.
MitigatedEstimate combine_reshaping(
    std::vector<std::pair<std::string, EnergyEstimate>> raw);

MitigatedEstimate run_reshaping(const CMatrix &H, const NoiseModel &noise,
                                const PairObservable &obs,
                                const SpectroscopyConfig &cfg,
                                const ReshapeSet &set,
                                const EstimatorConfig &est = {},
                                Backend backend = Backend::spectral);

/// c / (c - 1) * (e0 - e1).
double rescale_first(double e0, double e1, double c);

/// Exact for e_l = E / c_l + b1 + c_l b2 with c_0 = 1.
double rescale_second(double e0, double e1, double e2, double c1, double c2);

enum class RescaleOrder { first, second };

/// raw must hold estimates for factor 1, c1 and (second order) c2, where the
/// estimate for factor c was taken with time step c * dt.
MitigatedEstimate combine_rescaling(const EnergyEstimate &e0,
                                    const EnergyEstimate &e1,
                                    const EnergyEstimate *e2,
                                    const RescaleConfig &rc, RescaleOrder order);

MitigatedEstimate run_rescaling(const CMatrix &H, const NoiseModel &noise,
                                const PairObservable &obs,
                                const SpectroscopyConfig &cfg,
                                const RescaleConfig &rc, RescaleOrder order,
                                const EstimatorConfig &est = {},
                                Backend backend = Backend::spectral);

/// Pointwise Richardson combination of series taken at factors 1, c1 and
/// (when rc.c2 is set) c2. The result carries the dt of the first series.
TimeSeries richardson_series(const std::vector<TimeSeries> &series,
                             const RescaleConfig &rc);

MitigatedEstimate run_richardson(const CMatrix &H, const NoiseModel &noise,
                                 const PairObservable &obs,
                                 const SpectroscopyConfig &cfg,
                                 const RescaleConfig &rc,
                                 const EstimatorConfig &est = {},
                                 Backend backend = Backend::spectral);

/// <a| P Dtilde[P |a><b| P] P |b> for each string, with Dtilde the noise
/// superoperator. No dynamics involved.
std::vector<Complex> reshaped_first_order_shifts(
    const NoiseModel &noise, const CVector &a_state, const CVector &b_state,
    const std::vector<PauliString> &strings);

/// Mean of reshaped_first_order_shifts.
Complex twirled_first_order_shift(const NoiseModel &noise,
                                  const CVector &a_state, const CVector &b_state,
                                  const std::vector<PauliString> &strings);

}  // namespace aqem
