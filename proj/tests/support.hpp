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


// Helpers shared by the unit and acceptance tests.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "aqem/operators.hpp"
#include "aqem/random.hpp"

namespace aqem::testing {

inline Complex random_complex(Rng &rng) {
  return {2.0 * uniform_real(rng) - 1.0, 2.0 * uniform_real(rng) - 1.0};
}

inline CMatrix random_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = random_complex(rng);
  return m;
}

inline CMatrix random_hermitian(Rng &rng, Eigen::Index dim) {
  const CMatrix m = random_matrix(rng, dim, dim);
  return 0.5 * (m + m.adjoint());
}

inline CVector random_state(Rng &rng, Eigen::Index dim) {
  CVector v = random_matrix(rng, dim, 1);
  return v / v.norm();
}

/// Arbitrary noise: `count` dense Lindblads and a dense error Hamiltonian,
/// all of size ~scale.
inline NoiseModel random_dense_noise(Rng &rng, int n, int count, double scale) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::vector<CMatrix> ls;
  for (int k = 0; k < count; ++k) ls.push_back(std::sqrt(scale) * random_matrix(rng, dim, dim));
  return custom_noise(scale, std::move(ls), scale * random_hermitian(rng, dim));
}

/// Strictly local noise: one random 2x2 Lindblad and one random 2x2 error
/// term per qubit.
inline NoiseModel random_local_noise(Rng &rng, int n, double scale) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::vector<CMatrix> ls;
  CMatrix h = CMatrix::Zero(dim, dim);
  for (int q = 0; q < n; ++q) {
    ls.push_back(std::sqrt(scale) * embed_single(random_matrix(rng, 2, 2), q, n));
    h += scale * embed_single(random_hermitian(rng, 2), q, n);
  }
  return custom_noise(scale, std::move(ls), h);
}

inline double max_diff(const CMatrix &a, const CMatrix &b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace aqem::testing
