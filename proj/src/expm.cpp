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

#include "aqem/expm.hpp"

#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace aqem {

CMatrix expm(const CMatrix &A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("expm: matrix is not square");
  if (!A.allFinite()) throw std::invalid_argument("expm: non-finite entries");
  if (A.size() == 0) return A;
  return A.exp();
}

}  // namespace aqem
