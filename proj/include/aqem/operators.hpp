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
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace aqem {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Raised when an iterative or factorization routine cannot meet its
/// accuracy contract. `estimate` carries the achieved error when known.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string &what, double estimate = -1.0)
      : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

/// Single-qubit Pauli letter. The encoding is the binary symplectic pair
/// (x bit, z bit), so the phase-free product of two letters is their xor.
enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

char pauli_char(Pauli p);

/// Tensor product of Pauli letters, qubit 0 first (most significant factor
/// of the Kronecker product). Carries no global phase.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<Pauli> letters);
  /// Parses e.g. "XIZY". Throws std::invalid_argument on other characters.
  static PauliString parse(std::string_view text);
  static PauliString identity(int n);
  /// The same letter on every qubit, e.g. X^{\otimes n}.
  static PauliString uniform(Pauli p, int n);
  /// Index in [0, 4^n) -> string, base-4 digits in qubit order using I,X,Y,Z.
  static PauliString from_index(std::uint64_t index, int n);

  int size() const { return static_cast<int>(letters_.size()); }
  Pauli operator[](int q) const { return letters_[q]; }
  const std::vector<Pauli> &letters() const { return letters_; }
  bool is_identity() const;
  std::string str() const;

  /// Letterwise product with the phase discarded.
  PauliString operator*(const PauliString &other) const;
  bool operator==(const PauliString &other) const = default;

 private:
  std::vector<Pauli> letters_;
};

/// Returns the 2^n x 2^n matrix of the string.
CMatrix pauli_matrix(const PauliString &p);

/// +1 if the two strings commute, -1 if they anticommute.
int commutation_sign(const PauliString &p, const PauliString &q);

/// Embeds a 2x2 operator acting on `site` into the n-qubit space.
CMatrix embed_single(const CMatrix &op, int site, int n);

/// Returns n for dim == 2^n, throws otherwise.
int qubit_count(Eigen::Index dim);

double max_abs(const CMatrix &m);
bool is_hermitian(const CMatrix &m, double tol);

enum class ModelVariant { ring, xx_chain };

/// "ring" or "xx-chain".
std::string to_string(ModelVariant variant);
ModelVariant parse_model_variant(std::string_view text);

/// Parameters of the two built-in models. Ring parameters are frequencies;
/// the builder applies the 2*pi factors.
struct HamiltonianSpec {
  ModelVariant variant = ModelVariant::ring;
  int n = 2;
  double nu_z = 0.0;
  double nu_x = 0.0;
  double J = 0.0;
  double g = 0.0;

  void validate() const;
};

/// Ring: H = 1/2 sum_i 2pi(nu_z Z_i + nu_x X_i) + 1/2 sum_<ij> 2pi J (XX+YY).
/// Open XX chain: H = -g sum_j X_j X_{j+1} - sum_j X_j - sum_j Y_j.
CMatrix build_hamiltonian(const HamiltonianSpec &spec);

/// Nearest-neighbour bonds of the ring. n = 2 yields the single bond (0,1).
std::vector<std::pair<int, int>> ring_edges(int n);

enum class NoiseKind { paper_default, amplitude_damping, custom };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view text);

/// The perturbation on top of -i[H, .]: Lindblad operators already scaled by
/// sqrt(kappa) and the systematic error Hamiltonian h_err.
struct NoiseModel {
  NoiseKind kind = NoiseKind::custom;
  double kappa = 0.0;
  double beta = 0.0;
  std::vector<CMatrix> lindblads;
  CMatrix h_err;

  Eigen::Index dim() const { return h_err.rows(); }
};

/// Built-in noise: n single-site Lindblads
///   paper_default:     sqrt(kappa) * [[i, 0], [0, 1]]
///   amplitude_damping: sqrt(kappa) * [[0, 1], [0, 0]]
/// with h_err = kappa * beta * sum_j Z_j. kappa == 0 gives the empty model.
NoiseModel build_noise(NoiseKind kind, double kappa, double beta, int n);

/// Noise with user supplied (already scaled) Lindblads and error Hamiltonian.
NoiseModel custom_noise(double kappa, std::vector<CMatrix> lindblads,
                        CMatrix h_err);

/// Noiseless model of the right dimension.
NoiseModel no_noise(int n);

struct Spectrum {
  Eigen::VectorXd energies;  // ascending
  CMatrix vectors;           // columns aligned with energies

  Eigen::Index dim() const { return energies.size(); }
  double norm() const;  // max |E_j|
  CVector state(Eigen::Index j) const { return vectors.col(j); }
};

/// Exact diagonalization of a Hermitian operator.
Spectrum diagonalize(const CMatrix &H);

/// P A P for the Pauli string P.
CMatrix conjugate(const CMatrix &A, const PauliString &p);

/// P v.
CVector apply_pauli(const PauliString &p, const CVector &v);

}  // namespace aqem
