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


#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"

#include "aqem/expm.hpp"
#include "aqem/operators.hpp"
#include "support.hpp"

using namespace aqem;
using aqem::testing::max_diff;

namespace {

constexpr Complex kI{0.0, 1.0};

Eigen::VectorXd sorted_eigenvalues(const CMatrix &H) {
  Eigen::VectorXd e = diagonalize(H).energies;
  std::sort(e.data(), e.data() + e.size());
  return e;
}

}  // namespace

TEST_CASE("pauli matrices") {
  CMatrix x(2, 2), y(2, 2);
  x << 0, 1, 1, 0;
  y << 0, -kI, kI, 0;
  CHECK(max_diff(pauli_matrix(PauliString::parse("X")), x) == 0.0);
  CHECK(max_diff(pauli_matrix(PauliString::parse("Y")), y) == 0.0);
  const CMatrix zz = pauli_matrix(PauliString::parse("ZZ"));
  CHECK(max_diff(zz, Eigen::Vector4cd(1, -1, -1, 1).asDiagonal().toDenseMatrix()) == 0.0);

  // Qubit 0 is the most significant Kronecker factor.
  const CMatrix xi = pauli_matrix(PauliString::parse("XI"));
  CHECK(xi(0, 2) == Complex(1.0));
  CHECK(xi(0, 1) == Complex(0.0));
}

TEST_CASE("pauli string parsing and products") {
  CHECK(PauliString::parse("XIZY").str() == "XIZY");
  CHECK_THROWS_AS(PauliString::parse("XA"), std::invalid_argument);
  CHECK(PauliString::identity(3).is_identity());
  CHECK(PauliString::uniform(Pauli::X, 3).str() == "XXX");
  CHECK(PauliString::from_index(0, 2).str() == "II");
  CHECK(PauliString::from_index(6, 2).str() == "XY");
  CHECK(PauliString::from_index(15, 2).str() == "ZZ");
  CHECK((PauliString::parse("XZ") * PauliString::parse("ZZ")).str() == "YI");
}

TEST_CASE("commutation sign") {
  const auto s = [](const char *p, const char *q) {
    return commutation_sign(PauliString::parse(p), PauliString::parse(q));
  };
  CHECK(s("X", "X") == 1);
  CHECK(s("X", "Z") == -1);
  CHECK(s("XX", "ZI") == -1);
  CHECK(s("XX", "ZZ") == 1);

  // Agrees with the matrices for all two-qubit pairs.
  for (std::uint64_t i = 0; i < 16; ++i) {
    for (std::uint64_t j = 0; j < 16; ++j) {
      const auto p = PauliString::from_index(i, 2);
      const auto q = PauliString::from_index(j, 2);
      const CMatrix P = pauli_matrix(p), Q = pauli_matrix(q);
      const double sign = commutation_sign(p, q);
      CHECK(max_diff(P * Q, sign * (Q * P)) < 1e-15);
    }
  }
}

TEST_CASE("built-in hamiltonians") {
  HamiltonianSpec ring;
  ring.n = 2;
  ring.nu_z = 4;
  const Eigen::VectorXd e = sorted_eigenvalues(build_hamiltonian(ring));
  const double pi = std::numbers::pi;
  CHECK(e(0) == doctest::Approx(-8 * pi).epsilon(1e-14));
  CHECK(std::abs(e(1)) < 1e-12);
  CHECK(std::abs(e(2)) < 1e-12);
  CHECK(e(3) == doctest::Approx(8 * pi).epsilon(1e-14));

  HamiltonianSpec chain;
  chain.variant = ModelVariant::xx_chain;
  chain.n = 2;
  chain.g = 0.0;
  const Eigen::VectorXd c = sorted_eigenvalues(build_hamiltonian(chain));
  CHECK(c(0) == doctest::Approx(-2 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(c(1)) < 1e-12);
  CHECK(std::abs(c(2)) < 1e-12);
  CHECK(c(3) == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-14));

  HamiltonianSpec big{ModelVariant::ring, 6, 4.0, 1.0, 4.0, 0.0};
  const CMatrix H = build_hamiltonian(big);
  CHECK(H.rows() == 64);
  CHECK(is_hermitian(H, 1e-14));
  CHECK(std::abs(H.trace()) < 1e-12);

  HamiltonianSpec bad = big;
  bad.n = 11;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK(ring_edges(2).size() == 1);
  CHECK(ring_edges(5).size() == 5);
}

TEST_CASE("ring hopping term conserves the excitation number") {
  // With nu_x = 0 the ring commutes with the total Z.
  HamiltonianSpec spec{ModelVariant::ring, 4, 1.3, 0.0, 0.7, 0.0};
  const CMatrix H = build_hamiltonian(spec);
  CMatrix total_z = CMatrix::Zero(16, 16);
  CMatrix z(2, 2);
  z << 1, 0, 0, -1;
  for (int q = 0; q < 4; ++q) total_z += embed_single(z, q, 4);
  CHECK(max_diff(H * total_z, total_z * H) < 1e-12);
}

TEST_CASE("built-in noise") {
  const NoiseModel dephase = build_noise(NoiseKind::paper_default, 0.01, 0.01, 1);
  REQUIRE(dephase.lindblads.size() == 1);
  CMatrix expected(2, 2);
  expected << 0.1 * kI, 0, 0, 0.1;
  CHECK(max_diff(dephase.lindblads[0], expected) < 1e-16);
  CMatrix herr(2, 2);
  herr << 1e-4, 0, 0, -1e-4;
  CHECK(max_diff(dephase.h_err, herr) < 1e-18);

  const NoiseModel damp = build_noise(NoiseKind::amplitude_damping, 0.04, 0.0, 1);
  REQUIRE(damp.lindblads.size() == 1);
  expected << 0, 0.2, 0, 0;
  CHECK(max_diff(damp.lindblads[0], expected) < 1e-16);
  CHECK(damp.h_err.cwiseAbs().maxCoeff() == 0.0);

  const NoiseModel none = build_noise(NoiseKind::paper_default, 0.0, 0.01, 3);
  CHECK(none.lindblads.empty());
  CHECK(none.dim() == 8);
  CHECK(none.h_err.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(build_noise(NoiseKind::paper_default, -1.0, 0.0, 2), std::invalid_argument);
  CHECK(parse_noise_kind(to_string(NoiseKind::amplitude_damping)) == NoiseKind::amplitude_damping);
}

TEST_CASE("diagonalize") {
  CMatrix d(2, 2);
  d << 3, 0, 0, -1;
  const Spectrum s = diagonalize(d);
  CHECK(s.energies(0) == -1.0);
  CHECK(s.energies(1) == 3.0);
  CHECK(std::abs(s.vectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(s.vectors(0, 1)) == doctest::Approx(1.0));

  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  const Spectrum sx = diagonalize(x);
  CHECK(sx.energies(0) == doctest::Approx(-1.0));
  CHECK(sx.energies(1) == doctest::Approx(1.0));
  // (1, -1)/sqrt2 up to a phase.
  CHECK(std::abs(sx.vectors(0, 0) + sx.vectors(1, 0)) < 1e-15);
  CHECK(std::abs(sx.vectors(0, 1) - sx.vectors(1, 1)) < 1e-15);

  Rng rng(7);
  const CMatrix H = aqem::testing::random_hermitian(rng, 16);
  const Spectrum sh = diagonalize(H);
  const CMatrix rebuilt = sh.vectors * sh.energies.cast<Complex>().asDiagonal() * sh.vectors.adjoint();
  CHECK(max_diff(rebuilt, H) <= 1e-10);
  CHECK(std::is_sorted(sh.energies.data(), sh.energies.data() + sh.energies.size()));

  CMatrix nonherm(2, 2);
  nonherm << 0, 1, 0, 0;
  CHECK_THROWS_AS(diagonalize(nonherm), std::invalid_argument);
}

TEST_CASE("pauli conjugation") {
  CMatrix z(2, 2);
  z << 1, 0, 0, -1;
  CHECK(max_diff(conjugate(z, PauliString::parse("X")), -z) == 0.0);

  const CMatrix xxyy = pauli_matrix(PauliString::parse("XX")) + pauli_matrix(PauliString::parse("YY"));
  CHECK(max_diff(conjugate(xxyy, PauliString::parse("XX")), xxyy) < 1e-15);

  HamiltonianSpec spec{ModelVariant::ring, 3, 4.0, 1.0, 4.0, 0.0};
  const CMatrix H = build_hamiltonian(spec);
  const Eigen::VectorXd e = sorted_eigenvalues(H);
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = PauliString::from_index(uniform_index(rng, 64), 3);
    const CMatrix P = pauli_matrix(p);
    CHECK(max_diff(conjugate(H, p), P * H * P) < 1e-12);
    CHECK((sorted_eigenvalues(conjugate(H, p)) - e).cwiseAbs().maxCoeff() < 1e-10);

    const CVector v = aqem::testing::random_state(rng, 8);
    CHECK(max_diff(apply_pauli(p, v), P * v) < 1e-15);
  }
}

TEST_CASE("matrix exponential") {
  CMatrix n(2, 2);
  n << 0, 1, 0, 0;
  CMatrix expected(2, 2);
  expected << 1, 1, 0, 1;
  CHECK(max_diff(expm(n), expected) < 1e-15);

  // exp(-iHt) against the eigendecomposition, including large norms that
  // need squaring.
  Rng rng(3);
  for (double t : {1e-3, 0.5, 40.0}) {
    const CMatrix H = aqem::testing::random_hermitian(rng, 8);
    const Spectrum s = diagonalize(H);
    CVector phases(8);
    for (int j = 0; j < 8; ++j) phases(j) = std::exp(-kI * s.energies(j) * t);
    const CMatrix oracle = s.vectors * phases.asDiagonal() * s.vectors.adjoint();
    CHECK(max_diff(expm(-kI * t * H), oracle) < 1e-11);
  }

  CHECK_THROWS_AS(expm(CMatrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("qubit count") {
  CHECK(qubit_count(8) == 3);
  CHECK_THROWS_AS(qubit_count(6), std::invalid_argument);
}
