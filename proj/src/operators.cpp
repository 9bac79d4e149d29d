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

#include "aqem/operators.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace aqem {

namespace {

constexpr Complex kI{0.0, 1.0};

CMatrix single_qubit(Pauli p) {
  CMatrix m(2, 2);
  switch (p) {
    case Pauli::I:
      m << 1, 0, 0, 1;
      break;
    case Pauli::X:
      m << 0, 1, 1, 0;
      break;
    case Pauli::Y:
      m << 0, -kI, kI, 0;
      break;
    case Pauli::Z:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

CMatrix kron(const CMatrix &a, const CMatrix &b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Pauli string as a signed permutation: P|x> = phase(x) |x ^ flip>.
struct SignedPermutation {
  std::uint64_t flip = 0;
  std::uint64_t zmask = 0;
  int y_count = 0;

  explicit SignedPermutation(const PauliString &p) {
    const int n = p.size();
    for (int q = 0; q < n; ++q) {
      const auto bit = std::uint64_t{1} << (n - 1 - q);
      const auto code = static_cast<std::uint8_t>(p[q]);
      if (code & 1u) flip |= bit;
      if (code & 2u) zmask |= bit;
      if (p[q] == Pauli::Y) ++y_count;
    }
  }

  // Y = i X Z, so every Y contributes a factor i on top of the Z sign.
  Complex phase(std::uint64_t x) const {
    static const Complex powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const int sign_flips = std::popcount(x & zmask);
    return powers[(y_count + 2 * sign_flips) & 3];
  }
};

}  // namespace

char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::I:
      return 'I';
    case Pauli::X:
      return 'X';
    case Pauli::Y:
      return 'Y';
    case Pauli::Z:
      return 'Z';
  }
  return '?';
}

PauliString::PauliString(std::vector<Pauli> letters)
    : letters_(std::move(letters)) {
  if (letters_.empty())
    throw std::invalid_argument("PauliString needs at least one qubit");
}

PauliString PauliString::parse(std::string_view text) {
  std::vector<Pauli> letters;
  letters.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case 'I':
        letters.push_back(Pauli::I);
        break;
      case 'X':
        letters.push_back(Pauli::X);
        break;
      case 'Y':
        letters.push_back(Pauli::Y);
        break;
      case 'Z':
        letters.push_back(Pauli::Z);
        break;
      default:
        throw std::invalid_argument("invalid Pauli letter '" +
                                    std::string(1, c) + "' in \"" +
                                    std::string(text) + "\"");
    }
  }
  return PauliString(std::move(letters));
}

PauliString PauliString::identity(int n) { return uniform(Pauli::I, n); }

PauliString PauliString::uniform(Pauli p, int n) {
  if (n < 1) throw std::invalid_argument("PauliString needs n >= 1");
  return PauliString(std::vector<Pauli>(static_cast<std::size_t>(n), p));
}

PauliString PauliString::from_index(std::uint64_t index, int n) {
  static constexpr Pauli order[4] = {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};
  if (n < 1 || n > 31) throw std::invalid_argument("from_index: bad n");
  std::vector<Pauli> letters(static_cast<std::size_t>(n));
  for (int q = n - 1; q >= 0; --q) {
    letters[q] = order[index & 3u];
    index >>= 2;
  }
  return PauliString(std::move(letters));
}

bool PauliString::is_identity() const {
  for (auto p : letters_)
    if (p != Pauli::I) return false;
  return true;
}

std::string PauliString::str() const {
  std::string s;
  s.reserve(letters_.size());
  for (auto p : letters_) s.push_back(pauli_char(p));
  return s;
}

PauliString PauliString::operator*(const PauliString &other) const {
  if (other.size() != size())
    throw std::invalid_argument("PauliString product: size mismatch");
  std::vector<Pauli> out(letters_.size());
  for (std::size_t q = 0; q < letters_.size(); ++q)
    out[q] = static_cast<Pauli>(static_cast<std::uint8_t>(letters_[q]) ^
                                static_cast<std::uint8_t>(other.letters_[q]));
  return PauliString(std::move(out));
}

CMatrix pauli_matrix(const PauliString &p) {
  const int n = p.size();
  const std::uint64_t dim = std::uint64_t{1} << n;
  const SignedPermutation perm(p);
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(dim),
                            static_cast<Eigen::Index>(dim));
  for (std::uint64_t x = 0; x < dim; ++x)
    m(static_cast<Eigen::Index>(x ^ perm.flip), static_cast<Eigen::Index>(x)) =
        perm.phase(x);
  return m;
}

int commutation_sign(const PauliString &p, const PauliString &q) {
  if (p.size() != q.size())
    throw std::invalid_argument("commutation_sign: size mismatch (" +
                                std::to_string(p.size()) + " vs " +
                                std::to_string(q.size()) + ")");
  int anticommuting_sites = 0;
  for (int i = 0; i < p.size(); ++i)
    if (p[i] != Pauli::I && q[i] != Pauli::I && p[i] != q[i])
      ++anticommuting_sites;
  return (anticommuting_sites % 2 == 0) ? 1 : -1;
}

CMatrix embed_single(const CMatrix &op, int site, int n) {
  if (op.rows() != 2 || op.cols() != 2)
    throw std::invalid_argument("embed_single: expected a 2x2 operator");
  if (site < 0 || site >= n)
    throw std::invalid_argument("embed_single: site out of range");
  const Eigen::Index left = Eigen::Index{1} << site;
  const Eigen::Index right = Eigen::Index{1} << (n - 1 - site);
  return kron(kron(CMatrix::Identity(left, left), op),
              CMatrix::Identity(right, right));
}

int qubit_count(Eigen::Index dim) {
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("dimension " + std::to_string(dim) +
                                " is not a power of two >= 2");
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

double max_abs(const CMatrix &m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMatrix &m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

std::string to_string(ModelVariant variant) {
  return variant == ModelVariant::ring ? "ring" : "xx-chain";
}

ModelVariant parse_model_variant(std::string_view text) {
  if (text == "ring") return ModelVariant::ring;
  if (text == "xx-chain") return ModelVariant::xx_chain;
  throw std::invalid_argument("unknown model variant \"" + std::string(text) +
                              "\" (expected ring or xx-chain)");
}

void HamiltonianSpec::validate() const {
  if (n < 2)
    throw std::invalid_argument("Hamiltonian needs n >= 2 qubits, got " +
                                std::to_string(n));
  if (n > 10)
    throw std::invalid_argument("dense Hamiltonians are limited to n <= 10");
}

std::vector<std::pair<int, int>> ring_edges(int n) {
  if (n == 2) return {{0, 1}};
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return edges;
}

CMatrix build_hamiltonian(const HamiltonianSpec &spec) {
  spec.validate();
  const int n = spec.n;
  const Eigen::Index dim = Eigen::Index{1} << n;
  const CMatrix X = single_qubit(Pauli::X);
  const CMatrix Y = single_qubit(Pauli::Y);
  const CMatrix Z = single_qubit(Pauli::Z);
  CMatrix H = CMatrix::Zero(dim, dim);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  if (spec.variant == ModelVariant::ring) {
    for (int i = 0; i < n; ++i)
      H += 0.5 * two_pi *
           (spec.nu_z * embed_single(Z, i, n) + spec.nu_x * embed_single(X, i, n));
    for (auto [i, j] : ring_edges(n))
      H += 0.5 * two_pi * spec.J *
           (embed_single(X, i, n) * embed_single(X, j, n) +
            embed_single(Y, i, n) * embed_single(Y, j, n));
  } else {
    for (int j = 0; j + 1 < n; ++j)
      H -= spec.g * embed_single(X, j, n) * embed_single(X, j + 1, n);
    for (int j = 0; j < n; ++j)
      H -= embed_single(X, j, n) + embed_single(Y, j, n);
  }
  // Remove rounding asymmetry from the products above.
  return 0.5 * (H + H.adjoint());
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::paper_default:
      return "paper-default";
    case NoiseKind::amplitude_damping:
      return "amplitude-damping";
    case NoiseKind::custom:
      return "custom";
  }
  return "?";
}

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "paper-default") return NoiseKind::paper_default;
  if (text == "amplitude-damping") return NoiseKind::amplitude_damping;
  if (text == "custom") return NoiseKind::custom;
  throw std::invalid_argument("unknown noise kind \"" + std::string(text) +
                              "\"");
}

NoiseModel no_noise(int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  NoiseModel model;
  model.kind = NoiseKind::custom;
  model.h_err = CMatrix::Zero(dim, dim);
  return model;
}

NoiseModel build_noise(NoiseKind kind, double kappa, double beta, int n) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("noise strength kappa must be >= 0");
  if (n < 1) throw std::invalid_argument("build_noise: n must be >= 1");
  CMatrix site(2, 2);
  switch (kind) {
    case NoiseKind::paper_default:
      site << kI, 0, 0, 1;
      break;
    case NoiseKind::amplitude_damping:
      site << 0, 1, 0, 0;
      break;
    case NoiseKind::custom:
      throw std::invalid_argument(
          "build_noise: custom noise needs explicit operators (custom_noise)");
  }
  NoiseModel model = no_noise(n);
  model.kind = kind;
  model.kappa = kappa;
  model.beta = beta;
  if (kappa == 0.0) return model;

  const double amplitude = std::sqrt(kappa);
  const CMatrix Z = single_qubit(Pauli::Z);
  for (int k = 0; k < n; ++k) {
    model.lindblads.push_back(amplitude * embed_single(site, k, n));
    model.h_err += kappa * beta * embed_single(Z, k, n);
  }
  return model;
}

NoiseModel custom_noise(double kappa, std::vector<CMatrix> lindblads,
                        CMatrix h_err) {
  const Eigen::Index dim = h_err.rows();
  qubit_count(dim);
  if (!is_hermitian(h_err, 1e-12))
    throw std::invalid_argument("custom_noise: h_err is not Hermitian");
  for (const auto &L : lindblads)
    if (L.rows() != dim || L.cols() != dim)
      throw std::invalid_argument("custom_noise: Lindblad dimension mismatch");
  NoiseModel model;
  model.kind = NoiseKind::custom;
  model.kappa = kappa;
  model.lindblads = std::move(lindblads);
  model.h_err = std::move(h_err);
  return model;
}

double Spectrum::norm() const {
  return energies.size() == 0 ? 0.0 : energies.cwiseAbs().maxCoeff();
}

Spectrum diagonalize(const CMatrix &H) {
  if (H.rows() != H.cols())
    throw std::invalid_argument("diagonalize: matrix is not square");
  const double scale = std::max(1.0, max_abs(H));
  if (!is_hermitian(H, 1e-10 * scale))
    throw std::invalid_argument("diagonalize: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(H);
  if (solver.info() != Eigen::Success)
    throw NumericalError("diagonalize: eigensolver did not converge");
  return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

CVector apply_pauli(const PauliString &p, const CVector &v) {
  const std::uint64_t dim = std::uint64_t{1} << p.size();
  if (static_cast<std::uint64_t>(v.size()) != dim)
    throw std::invalid_argument("apply_pauli: dimension mismatch");
  const SignedPermutation perm(p);
  CVector out(v.size());
  for (std::uint64_t x = 0; x < dim; ++x)
    out(static_cast<Eigen::Index>(x ^ perm.flip)) =
        perm.phase(x) * v(static_cast<Eigen::Index>(x));
  return out;
}

CMatrix conjugate(const CMatrix &A, const PauliString &p) {
  const Eigen::Index dim = Eigen::Index{1} << p.size();
  if (A.rows() != dim || A.cols() != dim)
    throw std::invalid_argument("conjugate: dimension mismatch");
  const SignedPermutation perm(p);
  // (P A P)_{ij} = phase(i ^ flip) A_{i^flip, j^flip} phase(j).
  CMatrix out(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const auto jx = static_cast<std::uint64_t>(j);
    const Complex right = perm.phase(jx);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto ix = static_cast<std::uint64_t>(i) ^ perm.flip;
      out(i, j) = perm.phase(ix) * A(static_cast<Eigen::Index>(ix),
                                     static_cast<Eigen::Index>(jx ^ perm.flip)) *
                  right;
    }
  }
  return out;
}

}  // namespace aqem
