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


#include <cmath>
#include <numbers>

#include "doctest.h"

#include "aqem/lindblad.hpp"
#include "aqem/mitigation.hpp"
#include "support.hpp"

using namespace aqem;
using aqem::testing::max_diff;

namespace {

constexpr double kPi = std::numbers::pi;

CMatrix ring(int n) {
  return build_hamiltonian({ModelVariant::ring, n, 4.0, 1.0, 4.0, 0.0});
}

CVector basis(Eigen::Index dim, Eigen::Index j) {
  CVector v = CVector::Zero(dim);
  v(j) = 1.0;
  return v;
}

// Single qubit with nu_z = 1: a = |0> (upper), b = |1>, E_ba = -2 pi.
struct Qubit {
  CMatrix H{2, 2};
  PairObservable obs{basis(2, 0), basis(2, 1)};
  Qubit() { H << kPi, 0, 0, -kPi; }
};

EnergyEstimate estimate_of(double v, std::size_t modes = 1) {
  EnergyEstimate e;
  e.value = v;
  e.n_modes = modes;
  return e;
}

}  // namespace

TEST_CASE("reshape sets") {
  const auto t4 = ReshapeSet::tensor_power_4().realize(3);
  REQUIRE(t4.size() == 4);
  CHECK(t4[0].str() == "III");
  CHECK(t4[1].str() == "XXX");
  CHECK(t4[2].str() == "YYY");
  CHECK(t4[3].str() == "ZZZ");
  const auto t2 = ReshapeSet::tensor_power_2().realize(2);
  REQUIRE(t2.size() == 2);
  CHECK(t2[1].str() == "XX");

  const auto a = ReshapeSet::full_pauli_sample(25, 9).realize(3);
  const auto b = ReshapeSet::full_pauli_sample(25, 9).realize(3);
  CHECK(a == b);
  CHECK(a.size() == 25);
  CHECK(a != ReshapeSet::full_pauli_sample(25, 10).realize(3));

  CHECK_THROWS_AS(ReshapeSet::explicit_set({PauliString::parse("XX")}).realize(3), std::invalid_argument);
  CHECK_THROWS_AS(ReshapeSet::full_pauli_sample(0, 1).validate(), std::invalid_argument);
  CHECK(parse_reshape_variant("tensor-power-2") == ReshapeSet::Variant::tensor_power_2);
  CHECK(to_string(ReshapeSet::Variant::full_pauli_sample) == "full-pauli-sample");
}

TEST_CASE("reshape_experiment") {
  Rng rng(4);
  const CMatrix H = ring(2);
  const Spectrum s = diagonalize(H);
  const PairObservable obs = pair_observable(s, 0, 3);
  const CVector psi = obs.initial_state();
  const auto same = reshape_experiment(H, psi, obs, PauliString::identity(2));
  CHECK(max_diff(same.hamiltonian, H) == 0.0);
  CHECK(max_diff(same.initial_state, psi) == 0.0);
  CHECK(max_diff(same.observable.matrix(), obs.matrix()) == 0.0);

  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  const auto flipped = reshape_experiment(x, basis(2, 0), PairObservable{basis(2, 0), basis(2, 1)},
                                          PauliString::parse("Z"));
  CHECK(max_diff(flipped.hamiltonian, -x) == 0.0);

  // The reshaped states are eigenstates of the reshaped Hamiltonian with the
  // same energies.
  const auto r = reshape_experiment(H, psi, obs, PauliString::parse("XY"));
  CHECK((r.hamiltonian * r.observable.a_state - s.energies(0) * r.observable.a_state).norm() < 1e-12);
  CHECK((r.hamiltonian * r.observable.b_state - s.energies(3) * r.observable.b_state).norm() < 1e-12);
}

TEST_CASE("constituent labels and preparation") {
  CHECK(Constituent{}.label() == "base");
  CHECK(Constituent{PauliString::identity(3), 1.0}.label() == "base");
  CHECK(Constituent{PauliString::parse("XZ"), 1.0}.label() == "P:XZ");
  CHECK(Constituent{{}, 1.5}.label() == "c:1.5");
  CHECK(Constituent{{}, 2.0}.label() == "c:2");
  CHECK(Constituent{PauliString::parse("XZ"), 2.0}.label() == "P:XZ,c:2");

  const CMatrix H = ring(2);
  const PairObservable obs = pair_observable(diagonalize(H), 1, 2);
  const auto p = prepare_constituent(H, obs, {1e-4, 100}, Constituent{{}, 2.0});
  CHECK(max_diff(p.hamiltonian, H / 2.0) < 1e-15);
  CHECK(p.cfg.dt == 2e-4);
  CHECK(p.cfg.length == 100);
}

TEST_CASE("rescaling algebra") {
  CHECK(rescale_first(1.1, 0.6, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double c : {1.2, 2.0, 7.5}) CHECK(rescale_first(3.0, 3.0 / c, c) == doctest::Approx(3.0).epsilon(1e-14));
  const double E = -2 * kPi, b = 0.049;
  CHECK(std::abs(rescale_first(E + b, E / 2 + b, 2.0) - E) < 1e-14);

  const double e2 = 1.0 / 1.5 + 0.1 + 1.5 * 0.01;
  CHECK(std::abs(rescale_second(1.11, 0.62, e2, 2.0, 1.5) - 1.0) < 1e-14);
  CHECK(std::abs(rescale_second(1.11, e2, 0.62, 1.5, 2.0) - 1.0) < 1e-14);
  CHECK(std::abs(rescale_second(2.0, 1.0, 2.0 / 1.5, 2.0, 1.5) - 2.0) < 1e-14);

  CHECK_THROWS_AS(rescale_first(1, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(rescale_second(1, 1, 1, 2.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS((RescaleConfig{0.5, {}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((RescaleConfig{2.0, 2.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((RescaleConfig{25.0, {}}.validate()), std::invalid_argument);
}

TEST_CASE("combine_rescaling") {
  const RescaleConfig rc{2.0, 1.5};
  const double E = 5.0, b1 = 0.3, b2 = 0.02;
  const auto e = [&](double c) { return estimate_of(E / c + b1 + c * b2); };
  const auto first = combine_rescaling(e(1), e(2), nullptr, rc, RescaleOrder::first);
  CHECK(first.strategy == "rescale1");
  CHECK(first.raw.size() == 2);
  const auto e15 = e(1.5);
  const auto second = combine_rescaling(e(1), e(2), &e15, rc, RescaleOrder::second);
  CHECK(std::abs(second.value - E) < 1e-13);
  CHECK(second.raw.size() == 3);
  CHECK(second.warnings.empty());

  const auto odd = estimate_of(1.0, 3);
  const auto mixed = combine_rescaling(estimate_of(1.0, 1), odd, nullptr, rc, RescaleOrder::first);
  CHECK_FALSE(mixed.warnings.empty());
  CHECK_THROWS_AS(combine_rescaling(e(1), e(2), nullptr, rc, RescaleOrder::second), std::invalid_argument);
}

TEST_CASE("richardson series cancellation") {
  const std::size_t L = 20;
  TimeSeries a{0.1, {}}, b{0.1, {}}, d{0.1, {}};
  Rng rng(8);
  for (std::size_t k = 0; k < L; ++k) {
    a.samples.push_back(aqem::testing::random_complex(rng));
    b.samples.push_back(aqem::testing::random_complex(rng));
    d.samples.push_back(aqem::testing::random_complex(rng));
  }
  const auto model = [&](double c, bool quadratic) {
    TimeSeries s{0.1 * c, {}};
    for (std::size_t k = 0; k < L; ++k)
      s.samples.push_back(a.samples[k] + c * b.samples[k] + (quadratic ? c * c * d.samples[k] : 0.0));
    return s;
  };
  const TimeSeries lin = richardson_series({model(1, false), model(2, false)}, {2.0, {}});
  CHECK(lin.dt == 0.1);
  for (std::size_t k = 0; k < L; ++k) CHECK(std::abs(lin.samples[k] - a.samples[k]) < 1e-14);
  const TimeSeries quad = richardson_series({model(1, true), model(2, true), model(1.5, true)}, {2.0, 1.5});
  for (std::size_t k = 0; k < L; ++k) CHECK(std::abs(quad.samples[k] - a.samples[k]) < 1e-13);
  const TimeSeries same = richardson_series({a, a, a}, {2.0, 1.5});
  for (std::size_t k = 0; k < L; ++k) CHECK(std::abs(same.samples[k] - a.samples[k]) < 1e-14);
  CHECK_THROWS_AS(richardson_series({a}, {2.0, {}}), std::invalid_argument);
}

TEST_CASE("noiseless fixed points") {
  const CMatrix H = ring(3);
  const Spectrum s = diagonalize(H);
  const PairObservable obs = pair_observable(s, 1, 5);
  const double e_ba = s.energies(5) - s.energies(1);
  const SpectroscopyConfig cfg{1e-4, 600};
  const NoiseModel none = no_noise(3);
  EstimatorConfig rescale_est;
  rescale_est.pencil.cutoff = 1e-2;

  const auto check = [&](const MitigatedEstimate &m) {
    CHECK(std::abs(m.value - e_ba) / std::abs(e_ba) < 1e-8);
  };
  check(run_reshaping(H, none, obs, cfg, ReshapeSet::tensor_power_4()));
  check(run_reshaping(H, none, obs, cfg, ReshapeSet::full_pauli_sample(3, 2)));
  check(run_rescaling(H, none, obs, cfg, {2.0, 1.5}, RescaleOrder::first, rescale_est));
  check(run_rescaling(H, none, obs, cfg, {2.0, 1.5}, RescaleOrder::second, rescale_est));
  check(run_richardson(H, none, obs, cfg, {2.0, 1.5}, rescale_est));
}

TEST_CASE("single-qubit rescaling removes the closed-form bias") {
  const Qubit q;
  const NoiseModel noise = build_noise(NoiseKind::paper_default, 0.05, 0.01, 1);
  const auto m = run_rescaling(q.H, noise, q.obs, {1e-2, 300}, {2.0, {}}, RescaleOrder::first);
  CHECK(std::abs(m.value + 2 * kPi) < 1e-8);
  REQUIRE(m.raw.size() == 2);
  CHECK(m.raw[0].first == "base");
  CHECK(m.raw[1].first == "c:2");
  CHECK(std::abs(m.raw[0].second.value - (-2 * kPi + 0.049)) < 1e-9);
  CHECK(std::abs(m.raw[1].second.value - (-kPi + 0.049)) < 1e-9);
}

TEST_CASE("reshaping labels keep draw order") {
  const Qubit q;
  const NoiseModel noise = build_noise(NoiseKind::paper_default, 0.01, 0.01, 1);
  const auto m = run_reshaping(q.H, noise, q.obs, {1e-2, 200},
                               ReshapeSet::explicit_set({PauliString::parse("X"), PauliString::parse("I")}));
  REQUIRE(m.raw.size() == 2);
  CHECK(m.raw[0].first == "0:P:X");
  CHECK(m.raw[1].first == "1:base");
}

TEST_CASE("twirling removes the first-order phase bias") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2;
    const CVector a = aqem::testing::random_state(rng, 4);
    const CVector b = aqem::testing::random_state(rng, 4);

    std::vector<PauliString> all;
    for (std::uint64_t i = 0; i < 16; ++i) all.push_back(PauliString::from_index(i, n));
    const NoiseModel dense = aqem::testing::random_dense_noise(rng, n, 3, 0.1);
    CHECK(std::abs(twirled_first_order_shift(dense, a, b, all).imag()) < 1e-12);
    // Without twirling the bias is generically nonzero.
    CHECK(std::abs(first_order_shift(dense, a, b).imag()) > 1e-6);

    const NoiseModel local = aqem::testing::random_local_noise(rng, n, 0.1);
    CHECK(std::abs(twirled_first_order_shift(local, a, b, ReshapeSet::tensor_power_4().realize(n)).imag()) < 1e-12);

    const NoiseModel damp = build_noise(NoiseKind::amplitude_damping, 0.1, 0.3, n);
    CHECK(std::abs(twirled_first_order_shift(damp, a, b, ReshapeSet::tensor_power_2().realize(n)).imag()) < 1e-12);
  }

  // Each term equals the unreshaped shift of the conjugated noise.
  const NoiseModel noise = build_noise(NoiseKind::paper_default, 0.2, 0.1, 2);
  const CVector a = basis(4, 1), b = basis(4, 2);
  const auto shifts = reshaped_first_order_shifts(noise, a, b, {PauliString::parse("XI")});
  const CMatrix P = pauli_matrix(PauliString::parse("XI"));
  std::vector<CMatrix> ls;
  for (const auto &l : noise.lindblads) ls.push_back(P * l * P);
  const NoiseModel conj = custom_noise(noise.kappa, ls, P * noise.h_err * P);
  CHECK(std::abs(shifts[0] - first_order_shift(conj, a, b)) < 1e-14);
}
