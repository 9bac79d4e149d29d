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

#include "aqem/lindblad.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "aqem/expm.hpp"

namespace aqem {

namespace {

constexpr Complex kI{0.0, 1.0};

CMatrix kron(const CMatrix &a, const CMatrix &b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void check_dims(const CMatrix &H, const NoiseModel &noise) {
  if (H.rows() != H.cols())
    throw std::invalid_argument("Hamiltonian is not square");
  if (noise.h_err.rows() != H.rows() || noise.h_err.cols() != H.cols())
    throw std::invalid_argument("noise model dimension " +
                                std::to_string(noise.h_err.rows()) +
                                " does not match Hamiltonian dimension " +
                                std::to_string(H.rows()));
  for (const auto &L : noise.lindblads)
    if (L.rows() != H.rows() || L.cols() != H.cols())
      throw std::invalid_argument("Lindblad operator dimension mismatch");
}

CMatrix lindblad_gram(const NoiseModel &noise) {
  const Eigen::Index d = noise.h_err.rows();
  CMatrix gram = CMatrix::Zero(d, d);
  for (const auto &L : noise.lindblads) gram += L.adjoint() * L;
  return gram;
}

class StepPropagator final : public Propagator {
 public:
  StepPropagator(const CMatrix &liouvillian, double dt, Eigen::Index dim)
      : Propagator(dt, dim), step_(expm(liouvillian * dt)) {
    // The exact one-step map preserves the trace: vec(I)^T P = vec(I)^T.
    const CVector id = vectorize(CMatrix::Identity(dim, dim));
    trace_defect_ = (id.transpose() * step_ - id.transpose()).cwiseAbs().maxCoeff();
  }

  Backend backend() const override { return Backend::stepper; }

  SeriesResult series(const CMatrix &rho0, const CMatrix &observable,
                      std::size_t length) const override {
    CVector state = vectorize(rho0);
    const CVector weights = vectorize(observable.transpose());
    SeriesResult out;
    out.series.dt = dt();
    out.series.samples.resize(length);
    CVector next(state.size());
    for (std::size_t k = 0; k < length; ++k) {
      out.series.samples[k] = (weights.transpose() * state)(0);
      if (k + 1 < length) {
        next.noalias() = step_ * state;
        state.swap(next);
      }
    }
    out.error_estimate =
        static_cast<double>(length) *
        std::max(trace_defect_, 4.0 * std::numeric_limits<double>::epsilon());
    return out;
  }

  CMatrix state_at(const CMatrix &rho0, std::size_t step) const override {
    CVector state = vectorize(rho0);
    CVector next(state.size());
    for (std::size_t k = 0; k < step; ++k) {
      next.noalias() = step_ * state;
      state.swap(next);
    }
    return unvectorize(state, dim());
  }

 private:
  CMatrix step_;
  double trace_defect_ = 0.0;
};

class SpectralPropagator final : public Propagator {
 public:
  SpectralPropagator(const CMatrix &liouvillian, double dt, Eigen::Index dim)
      : Propagator(dt, dim), eig_(liouvillian_eigensystem(liouvillian)) {
    // Reconstruction defect |R Lambda R^-1 - L|_F bounds the propagator
    // error per unit time.
    const CMatrix inverse = eig_.modes_lu.inverse();
    const CMatrix rebuilt =
        eig_.modes * eig_.eigenvalues.asDiagonal() * inverse;
    reconstruction_defect_ = (rebuilt - liouvillian).norm();
  }

  Backend backend() const override { return Backend::spectral; }

  SeriesResult series(const CMatrix &rho0, const CMatrix &observable,
                      std::size_t length) const override {
    const CVector state = vectorize(rho0);
    const CVector weights = vectorize(observable.transpose());
    const CVector coeffs = eig_.project(state);
    const CVector outgoing = eig_.modes.transpose() * weights;
    const CVector amplitude = outgoing.cwiseProduct(coeffs);

    SeriesResult out;
    out.series.dt = dt();
    out.series.samples.assign(length, Complex{0.0, 0.0});
    const double cutoff = 1e-18 * amplitude.cwiseAbs().sum();
    for (Eigen::Index m = 0; m < amplitude.size(); ++m) {
      if (std::abs(amplitude(m)) <= cutoff) continue;
      const Complex rate = eig_.eigenvalues(m) * dt();
      for (std::size_t k = 0; k < length; ++k)
        out.series.samples[k] +=
            amplitude(m) * std::exp(rate * static_cast<double>(k));
    }

    double peak = 0.0;
    for (const auto &y : out.series.samples) peak = std::max(peak, std::abs(y));
    const double direct = std::abs((weights.transpose() * state)(0) -
                                   out.series.samples.front());
    const double horizon = dt() * static_cast<double>(length);
    const double scale = weights.norm() * state.norm();
    out.error_estimate =
        (direct + horizon * reconstruction_defect_ * scale) /
        std::max(peak, std::numeric_limits<double>::min());
    return out;
  }

  CMatrix state_at(const CMatrix &rho0, std::size_t step) const override {
    const CVector coeffs = eig_.project(vectorize(rho0));
    const double t = dt() * static_cast<double>(step);
    CVector weighted(coeffs.size());
    for (Eigen::Index m = 0; m < coeffs.size(); ++m)
      weighted(m) = coeffs(m) * std::exp(eig_.eigenvalues(m) * t);
    return unvectorize(eig_.modes * weighted, dim());
  }

 private:
  LiouvillianEigensystem eig_;
  double reconstruction_defect_ = 0.0;
};

}  // namespace

void TimeSeries::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("time series needs dt > 0");
  if (samples.size() < 2)
    throw std::invalid_argument("time series needs at least 2 samples");
  for (const auto &y : samples)
    if (!std::isfinite(y.real()) || !std::isfinite(y.imag()))
      throw std::invalid_argument("time series has non-finite samples");
}

DampedMode DampedMode::from_pole(std::complex<double> amplitude,
                                 std::complex<double> pole) {
  DampedMode mode;
  mode.amplitude = amplitude;
  mode.decay = std::abs(pole);
  mode.phase = std::arg(pole);
  if (mode.phase <= -std::numbers::pi) mode.phase += 2.0 * std::numbers::pi;
  return mode;
}

TimeSeries synth_series(const std::vector<DampedMode> &modes, double dt,
                        std::size_t length) {
  for (const auto &m : modes)
    if (!(m.decay >= 0.0))
      throw std::invalid_argument("synth_series: decay must be >= 0");
  TimeSeries out;
  out.dt = dt;
  out.samples.assign(length, Complex{0.0, 0.0});
  for (const auto &m : modes)
    for (std::size_t k = 0; k < length; ++k) {
      const double kk = static_cast<double>(k);
      out.samples[k] += m.amplitude * std::polar(std::pow(m.decay, kk), m.phase * kk);
    }
  return out;
}

void PairObservable::validate() const {
  if (a_state.size() != b_state.size() || a_state.size() == 0)
    throw std::invalid_argument("pair observable: state size mismatch");
  if (std::abs(a_state.norm() - 1.0) > 1e-12 ||
      std::abs(b_state.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("pair observable: states must be unit norm");
}

CMatrix PairObservable::matrix() const {
  return scale * b_state * a_state.adjoint();
}

CVector PairObservable::initial_state() const {
  return (a_state + b_state) / std::numbers::sqrt2;
}

PairObservable pair_observable(const Spectrum &spectrum, Eigen::Index a,
                               Eigen::Index b) {
  if (a < 0 || b < 0 || a >= spectrum.dim() || b >= spectrum.dim() || a == b)
    throw std::invalid_argument("invalid eigenpair (" + std::to_string(a) +
                                ", " + std::to_string(b) + ")");
  return PairObservable{spectrum.state(a), spectrum.state(b), 2.0};
}

void SpectroscopyConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("spectroscopy: dt must be > 0");
  if (length < 2)
    throw std::invalid_argument("spectroscopy: need at least 2 samples");
}

bool SpectroscopyConfig::aliases(const Spectrum &spectrum) const {
  if (spectrum.dim() == 0) return false;
  const double max_gap = spectrum.energies.maxCoeff() - spectrum.energies.minCoeff();
  return dt * max_gap >= std::numbers::pi;
}

std::string to_string(Backend backend) {
  return backend == Backend::stepper ? "stepper" : "spectral";
}

Backend parse_backend(std::string_view text) {
  if (text == "stepper") return Backend::stepper;
  if (text == "spectral") return Backend::spectral;
  throw std::invalid_argument("unknown backend \"" + std::string(text) +
                              "\" (expected stepper or spectral)");
}

CVector vectorize(const CMatrix &m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvectorize(const CVector &v, Eigen::Index dim) {
  if (v.size() != dim * dim)
    throw std::invalid_argument("unvectorize: size mismatch");
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

CMatrix liouvillian_matrix(const CMatrix &H, const NoiseModel &noise) {
  check_dims(H, noise);
  const Eigen::Index d = H.rows();
  const CMatrix ident = CMatrix::Identity(d, d);
  const CMatrix h_exp = H + noise.h_err;
  const CMatrix gram = lindblad_gram(noise);
  // Left action A rho with A = -i H_exp - G/2, right action rho B with
  // B = i H_exp - G/2.
  const CMatrix left = -kI * h_exp - 0.5 * gram;
  const CMatrix right = kI * h_exp - 0.5 * gram;
  CMatrix out = kron(ident, left) + kron(right.transpose(), ident);
  for (const auto &L : noise.lindblads) out += kron(L.conjugate(), L);
  return out;
}

CMatrix apply_noise(const NoiseModel &noise, const CMatrix &X) {
  CMatrix out = -kI * (noise.h_err * X - X * noise.h_err);
  for (const auto &L : noise.lindblads) {
    const CMatrix gram = L.adjoint() * L;
    out += L * X * L.adjoint() - 0.5 * (gram * X + X * gram);
  }
  return out;
}

CMatrix apply_noise_adjoint(const NoiseModel &noise, const CMatrix &X) {
  CMatrix out = kI * (noise.h_err * X - X * noise.h_err);
  for (const auto &L : noise.lindblads) {
    const CMatrix gram = L.adjoint() * L;
    out += L.adjoint() * X * L - 0.5 * (gram * X + X * gram);
  }
  return out;
}

Complex first_order_shift(const NoiseModel &noise, const CVector &a_state,
                          const CVector &b_state) {
  const CMatrix dyad = a_state * b_state.adjoint();
  return a_state.dot(apply_noise(noise, dyad) * b_state);
}

LiouvillianEigensystem liouvillian_eigensystem(const CMatrix &liouvillian) {
  if (liouvillian.rows() != liouvillian.cols())
    throw std::invalid_argument("liouvillian_eigensystem: matrix not square");
  Eigen::ComplexEigenSolver<CMatrix> solver(liouvillian, true);
  if (solver.info() != Eigen::Success)
    throw NumericalError("Liouvillian eigensolver did not converge");

  LiouvillianEigensystem out;
  out.eigenvalues = solver.eigenvalues();
  out.modes = solver.eigenvectors();
  const double norm = std::max(liouvillian.norm(), std::numeric_limits<double>::min());
  const CMatrix residual =
      liouvillian * out.modes - out.modes * out.eigenvalues.asDiagonal();
  for (Eigen::Index m = 0; m < residual.cols(); ++m)
    out.max_residual = std::max(
        out.max_residual, residual.col(m).norm() / (norm * out.modes.col(m).norm()));
  if (out.max_residual > 1e-8)
    throw NumericalError("Liouvillian eigenmode residual too large",
                         out.max_residual);
  out.modes_lu.compute(out.modes);
  return out;
}

std::unique_ptr<Propagator> make_propagator(const CMatrix &H,
                                            const NoiseModel &noise, double dt,
                                            Backend backend) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagator needs dt > 0");
  const CMatrix liouvillian = liouvillian_matrix(H, noise);
  if (backend == Backend::stepper)
    return std::make_unique<StepPropagator>(liouvillian, dt, H.rows());
  return std::make_unique<SpectralPropagator>(liouvillian, dt, H.rows());
}

TimeSeries evolve_series(const Propagator &propagator,
                         const CVector &initial_state,
                         const PairObservable &obs, std::size_t length) {
  SpectroscopyConfig{propagator.dt(), length}.validate();
  obs.validate();
  if (initial_state.size() != propagator.dim() ||
      obs.a_state.size() != propagator.dim())
    throw std::invalid_argument("initial state dimension mismatch");
  if (std::abs(initial_state.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("initial state must be unit norm");

  const CMatrix rho0 = initial_state * initial_state.adjoint();
  SeriesResult result = propagator.series(rho0, obs.matrix(), length);
  if (!(result.error_estimate <= kSeriesTolerance)) {
    std::ostringstream msg;
    msg << to_string(propagator.backend())
        << " backend missed the series tolerance " << kSeriesTolerance
        << " (estimated relative error " << result.error_estimate << ")";
    throw NumericalError(msg.str(), result.error_estimate);
  }
  return std::move(result.series);
}

TimeSeries evolve_series(const CMatrix &H, const NoiseModel &noise,
                         const CVector &initial_state,
                         const PairObservable &obs,
                         const SpectroscopyConfig &cfg, Backend backend) {
  cfg.validate();
  const auto propagator = make_propagator(H, noise, cfg.dt, backend);
  return evolve_series(*propagator, initial_state, obs, cfg.length);
}

PerturbativePrediction perturbative_prediction(const Spectrum &spectrum,
                                               const NoiseModel &noise,
                                               Eigen::Index a, Eigen::Index b,
                                               double dt,
                                               double gap_threshold) {
  const Eigen::Index d = spectrum.dim();
  if (a < 0 || b < 0 || a >= d || b >= d || a == b)
    throw std::invalid_argument("perturbative_prediction: invalid pair");
  if (noise.h_err.rows() != d)
    throw std::invalid_argument("perturbative_prediction: dimension mismatch");
  if (gap_threshold < 0.0) gap_threshold = 1e-8 * spectrum.norm();

  const CMatrix &V = spectrum.vectors;
  const Eigen::VectorXd &E = spectrum.energies;
  const double e_ba = E(b) - E(a);
  const CMatrix dyad = spectrum.state(a) * spectrum.state(b).adjoint();

  // col(p, m) = <p| D[|a><b|] |m>          (coupling out of the mode ab)
  // row(p, m) = <a| D[|p><m|] |b>          (coupling back into the mode ab)
  //           = conj(<p| D^adj[|a><b|] |m>)
  const CMatrix col = V.adjoint() * apply_noise(noise, dyad) * V;
  const CMatrix row = (V.adjoint() * apply_noise_adjoint(noise, dyad) * V).conjugate();

  PerturbativePrediction out;
  out.lambda0 = kI * e_ba;
  out.lambda1 = col(a, b);
  out.lambda2 = Complex{0.0, 0.0};
  for (Eigen::Index m = 0; m < d; ++m) {
    for (Eigen::Index p = 0; p < d; ++p) {
      if (p == a && m == b) continue;
      const double denom = e_ba - (E(m) - E(p));
      const Complex coupling = row(p, m) * col(p, m);
      if (std::abs(denom) < gap_threshold) {
        ++out.excluded_terms;
        out.max_excluded_coupling =
            std::max(out.max_excluded_coupling, std::abs(coupling));
        continue;
      }
      out.lambda2 += coupling / (kI * denom);
    }
  }
  out.decay = std::exp(out.lambda1.real() * dt);
  out.phase_bias = out.lambda1.imag() * dt;

  const double coupling_scale = std::max(1e-300, std::norm(out.lambda1));
  if (out.max_excluded_coupling > 1e-10 * coupling_scale &&
      out.max_excluded_coupling > 1e-14) {
    std::ostringstream msg;
    msg << out.excluded_terms
        << " near-degenerate second-order terms excluded with coupling up to "
        << out.max_excluded_coupling << "; non-degenerate theory is unreliable";
    out.warnings.push_back(msg.str());
  }
  return out;
}

}  // namespace aqem
