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

#include "aqem/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/LevenbergMarquardt>

namespace aqem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double w) {
  w = std::remainder(w, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

double series_norm(const TimeSeries &s) {
  double acc = 0.0;
  for (const auto &y : s.samples) acc += std::norm(y);
  return std::sqrt(acc);
}

double model_residual(const TimeSeries &s, const std::vector<DampedMode> &modes) {
  const TimeSeries fit = synth_series(modes, s.dt, s.size());
  double num = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k)
    num += std::norm(s.samples[k] - fit.samples[k]);
  const double den = series_norm(s);
  return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

// z^k without accumulating rounding through repeated products.
Complex pole_power(Complex z, double k) {
  return std::polar(std::pow(std::abs(z), k), std::arg(z) * k);
}

// Residual functor for the refinement: parameters per mode are
// (Re C, Im C, log r, omega); residuals stack sqrt(w_k) (Re, Im).
struct ModeCost : Eigen::DenseFunctor<double> {
  const TimeSeries *series;
  std::vector<double> sqrt_w;
  int n_modes;

  ModeCost(const TimeSeries &s, std::vector<double> sw, int modes)
      : Eigen::DenseFunctor<double>(4 * modes, 2 * static_cast<int>(s.size())),
        series(&s),
        sqrt_w(std::move(sw)),
        n_modes(modes) {}

  Complex term(const InputType &x, int j, double k) const {
    const Complex amp(x(4 * j), x(4 * j + 1));
    return amp * std::exp(Complex(x(4 * j + 2), x(4 * j + 3)) * k);
  }

  int operator()(const InputType &x, ValueType &fvec) const {
    const auto L = series->size();
    for (std::size_t k = 0; k < L; ++k) {
      Complex model{0.0, 0.0};
      for (int j = 0; j < n_modes; ++j) model += term(x, j, static_cast<double>(k));
      const Complex r = (model - series->samples[k]) * sqrt_w[k];
      fvec(2 * k) = r.real();
      fvec(2 * k + 1) = r.imag();
    }
    return 0;
  }

  int df(const InputType &x, JacobianType &fjac) const {
    const auto L = series->size();
    for (std::size_t k = 0; k < L; ++k) {
      const double kk = static_cast<double>(k);
      for (int j = 0; j < n_modes; ++j) {
        const Complex base = std::exp(Complex(x(4 * j + 2), x(4 * j + 3)) * kk) * sqrt_w[k];
        const Complex amp(x(4 * j), x(4 * j + 1));
        const Complex d_re = base;
        const Complex d_im = Complex(0.0, 1.0) * base;
        const Complex d_s = amp * kk * base;
        const Complex d_w = Complex(0.0, 1.0) * amp * kk * base;
        const Complex cols[4] = {d_re, d_im, d_s, d_w};
        for (int c = 0; c < 4; ++c) {
          fjac(2 * k, 4 * j + c) = cols[c].real();
          fjac(2 * k + 1, 4 * j + c) = cols[c].imag();
        }
      }
    }
    return 0;
  }
};

Eigen::VectorXd pack(const std::vector<DampedMode> &modes) {
  Eigen::VectorXd x(4 * modes.size());
  for (std::size_t j = 0; j < modes.size(); ++j) {
    x(4 * j) = modes[j].amplitude.real();
    x(4 * j + 1) = modes[j].amplitude.imag();
    x(4 * j + 2) = std::log(std::max(modes[j].decay, 1e-300));
    x(4 * j + 3) = modes[j].phase;
  }
  return x;
}

std::vector<DampedMode> unpack(const Eigen::VectorXd &x) {
  std::vector<DampedMode> modes(x.size() / 4);
  for (std::size_t j = 0; j < modes.size(); ++j) {
    modes[j].amplitude = Complex(x(4 * j), x(4 * j + 1));
    modes[j].decay = std::exp(x(4 * j + 2));
    modes[j].phase = wrap_phase(x(4 * j + 3));
  }
  return modes;
}

void flag_near_degenerate(const std::vector<DampedMode> &modes, std::size_t length,
                          std::vector<std::string> &warnings) {
  double max_amp = 0.0;
  for (const auto &m : modes) max_amp = std::max(max_amp, std::abs(m.amplitude));
  const double resolution = kTwoPi / static_cast<double>(length);
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      if (std::abs(modes[i].amplitude) * 10.0 < max_amp ||
          std::abs(modes[j].amplitude) * 10.0 < max_amp)
        continue;
      if (std::abs(wrap_phase(modes[i].phase - modes[j].phase)) < resolution) {
        std::ostringstream msg;
        msg << "near-degenerate retrieved modes at omega " << modes[i].phase
            << " and " << modes[j].phase;
        warnings.push_back(msg.str());
      }
    }
}

}  // namespace

std::size_t MatrixPencilConfig::resolved_param(std::size_t length) const {
  return pencil_param == 0 ? length / 3 : pencil_param;
}

void MatrixPencilConfig::validate(std::size_t length) const {
  if (!(cutoff > 0.0 && cutoff < 1.0))
    throw std::invalid_argument("matrix pencil cutoff must lie in (0, 1)");
  if (length < 4)
    throw std::invalid_argument("matrix pencil needs at least 4 samples");
  const std::size_t lp = resolved_param(length);
  if (lp < 1 || lp > length - 2)
    throw std::invalid_argument("pencil parameter " + std::to_string(lp) +
                                " outside [1, L-2] for L = " +
                                std::to_string(length));
}

std::vector<DampedMode> matrix_pencil(const TimeSeries &series,
                                      const MatrixPencilConfig &cfg,
                                      PencilDiagnostics *diag) {
  series.validate();
  cfg.validate(series.size());
  const auto L = static_cast<Eigen::Index>(series.size());
  const auto lp = static_cast<Eigen::Index>(cfg.resolved_param(series.size()));
  const Eigen::Index rows = L - lp;
  const Eigen::Index cols = lp + 1;

  CMatrix hankel(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) hankel(i, j) = series.samples[i + j];

  Eigen::BDCSVD<CMatrix> svd(hankel, Eigen::ComputeThinV);
  const Eigen::VectorXd &sv = svd.singularValues();
  Eigen::Index retained = 0;
  if (sv.size() > 0 && sv(0) > 0.0)
    while (retained < sv.size() && sv(retained) > sv(0) * cfg.cutoff) ++retained;
  if (retained == 0)
    throw NumericalError("matrix pencil: no singular value above the cutoff");

  // Hankel rows lie in the span of the conjugated right singular vectors;
  // the shift structure of [1, z, ..., z^L_P] gives W2 t = z W1 t.
  const CMatrix W = svd.matrixV().leftCols(retained).conjugate();
  const CMatrix W1 = W.topRows(cols - 1);
  const CMatrix W2 = W.bottomRows(cols - 1);
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(W1);
  if (cod.rank() < retained)
    throw NumericalError("matrix pencil: shifted subspace is rank deficient");
  const CMatrix pencil = cod.solve(W2);
  Eigen::ComplexEigenSolver<CMatrix> eig(pencil, false);
  if (eig.info() != Eigen::Success)
    throw NumericalError("matrix pencil: eigenvalue solver failed");

  std::vector<Complex> poles(eig.eigenvalues().data(),
                             eig.eigenvalues().data() + retained);
  const AmplitudeFit fit = fit_amplitudes(series, poles);
  std::vector<DampedMode> modes;
  modes.reserve(poles.size());
  for (std::size_t j = 0; j < poles.size(); ++j)
    modes.push_back(DampedMode::from_pole(fit.amplitudes(j), poles[j]));

  if (diag) {
    diag->singular_values.assign(sv.data(), sv.data() + sv.size());
    diag->retained = static_cast<std::size_t>(retained);
    diag->residual = fit.residual;
    diag->condition = fit.condition;
    diag->warnings = fit.warnings;
  }
  return modes;
}

std::vector<double> dft_peak(const TimeSeries &series, double rel_threshold) {
  if (series.size() < 2)
    throw std::invalid_argument("dft_peak needs at least 2 samples");
  const std::size_t L = series.size();
  Eigen::FFT<double> fft;
  std::vector<Complex> spectrum;
  fft.fwd(spectrum, series.samples);
  std::vector<double> mag(L);
  for (std::size_t m = 0; m < L; ++m) mag[m] = std::abs(spectrum[m]);
  const double top = *std::max_element(mag.begin(), mag.end());
  if (top == 0.0) return {};

  std::vector<std::size_t> bins;
  for (std::size_t m = 0; m < L; ++m) {
    const double left = mag[(m + L - 1) % L];
    const double right = mag[(m + 1) % L];
    if (mag[m] >= left && mag[m] > right && mag[m] >= rel_threshold * top)
      bins.push_back(m);
  }
  if (bins.empty()) bins.push_back(static_cast<std::size_t>(
      std::max_element(mag.begin(), mag.end()) - mag.begin()));
  std::stable_sort(bins.begin(), bins.end(),
                   [&](std::size_t x, std::size_t y) { return mag[x] > mag[y]; });

  std::vector<double> out;
  out.reserve(bins.size());
  for (std::size_t m : bins) {
    double w = kTwoPi * static_cast<double>(m) / static_cast<double>(L);
    if (w > std::numbers::pi) w -= kTwoPi;
    out.push_back(w);
  }
  return out;
}

AmplitudeFit fit_amplitudes(const TimeSeries &series,
                            const std::vector<std::complex<double>> &poles) {
  series.validate();
  const auto L = static_cast<Eigen::Index>(series.size());
  const auto M = static_cast<Eigen::Index>(poles.size());
  if (M == 0) throw std::invalid_argument("fit_amplitudes: no poles");
  if (M > L) throw std::invalid_argument("fit_amplitudes: more poles than samples");
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = i + 1; j < M; ++j)
      if (poles[i] == poles[j])
        throw std::invalid_argument("fit_amplitudes: poles must be distinct");

  CMatrix vander(L, M);
  Eigen::VectorXd scale(M);
  for (Eigen::Index j = 0; j < M; ++j) {
    const double r = std::abs(poles[j]);
    const double grow = r > 1.0 ? std::pow(r, -static_cast<double>(L - 1)) : 1.0;
    for (Eigen::Index k = 0; k < L; ++k)
      vander(k, j) = grow * pole_power(poles[j], static_cast<double>(k));
    const double n = vander.col(j).norm();
    scale(j) = grow / n;
    vander.col(j) /= n;
  }
  const CVector y = Eigen::Map<const CVector>(series.samples.data(), L);
  Eigen::ColPivHouseholderQR<CMatrix> qr(vander);
  const CVector scaled = qr.solve(y);

  AmplitudeFit out;
  out.amplitudes = scaled.cwiseProduct(scale.cast<Complex>());
  const CMatrix R = qr.matrixR().topLeftCorner(M, M).triangularView<Eigen::Upper>();
  const Eigen::VectorXd rs = Eigen::JacobiSVD<CMatrix>(R).singularValues();
  out.condition = rs(M - 1) > 0.0 ? rs(0) / rs(M - 1)
                                  : std::numeric_limits<double>::infinity();
  const double ynorm = y.norm();
  const double rnorm = (vander * scaled - y).norm();
  out.residual = ynorm > 0.0 ? rnorm / ynorm : rnorm;
  if (out.condition > 1e12) {
    std::ostringstream msg;
    msg << "ill-conditioned Vandermonde system (condition estimate "
        << out.condition << ")";
    out.warnings.push_back(msg.str());
  }
  return out;
}

RefineResult refine_least_squares(const TimeSeries &series,
                                  const std::vector<DampedMode> &init,
                                  const std::vector<double> &weights) {
  series.validate();
  if (init.empty()) throw std::invalid_argument("refine_least_squares: no modes");
  std::vector<double> sqrt_w(series.size(), 1.0);
  if (!weights.empty()) {
    if (weights.size() != series.size())
      throw std::invalid_argument("refine_least_squares: weight count mismatch");
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (!(weights[k] >= 0.0))
        throw std::invalid_argument("refine_least_squares: negative weight");
      sqrt_w[k] = std::sqrt(weights[k]);
    }
  }

  ModeCost cost(series, std::move(sqrt_w), static_cast<int>(init.size()));
  Eigen::VectorXd x = pack(init);
  Eigen::VectorXd fvec(cost.values());
  cost(x, fvec);

  RefineResult out;
  out.modes = init;
  out.initial_cost = fvec.squaredNorm();
  out.final_cost = out.initial_cost;
  if (out.initial_cost == 0.0) return out;

  Eigen::LevenbergMarquardt<ModeCost> lm(cost);
  lm.setFtol(1e-12);
  lm.setXtol(1e-15);
  lm.setGtol(0.0);
  lm.setMaxfev(200);
  lm.minimize(x);
  out.iterations = static_cast<int>(lm.iterations());

  cost(x, fvec);
  const double final_cost = fvec.squaredNorm();
  if (!x.allFinite() || !std::isfinite(final_cost)) {
    out.diverged = true;
    return out;
  }
  if (final_cost <= out.initial_cost) {
    out.modes = unpack(x);
    out.final_cost = final_cost;
  }
  return out;
}

DampedMode select_mode(const std::vector<DampedMode> &modes) {
  if (modes.empty()) throw std::invalid_argument("select_mode: no modes");
  constexpr double kTie = 1e-12;
  auto better = [&](const DampedMode &x, const DampedMode &y) {
    const double ax = std::abs(x.amplitude), ay = std::abs(y.amplitude);
    if (std::abs(ax - ay) > kTie * std::max(ax, ay)) return ax > ay;
    const double wx = std::abs(x.phase), wy = std::abs(y.phase);
    if (std::abs(wx - wy) > kTie) return wx < wy;
    if (std::abs(x.decay - y.decay) > kTie) return x.decay > y.decay;
    return x.phase > y.phase;
  };
  DampedMode best = modes.front();
  for (std::size_t j = 1; j < modes.size(); ++j)
    if (better(modes[j], best)) best = modes[j];
  return best;
}

std::string to_string(EstimateMethod method) {
  switch (method) {
    case EstimateMethod::pencil: return "pencil";
    case EstimateMethod::pencil_refine: return "pencil+refine";
    case EstimateMethod::dft: return "dft";
  }
  return "pencil";
}

EstimateMethod parse_estimate_method(std::string_view text) {
  if (text == "pencil") return EstimateMethod::pencil;
  if (text == "pencil+refine") return EstimateMethod::pencil_refine;
  if (text == "dft") return EstimateMethod::dft;
  throw std::invalid_argument("unknown estimation method \"" + std::string(text) +
                              "\" (expected pencil, pencil+refine or dft)");
}

EnergyEstimate estimate_energy(const TimeSeries &series,
                               const EstimatorConfig &cfg) {
  series.validate();
  EnergyEstimate out;
  out.method = cfg.method;
  std::vector<DampedMode> modes;

  if (cfg.method == EstimateMethod::dft) {
    const std::vector<double> peaks = dft_peak(series);
    if (peaks.empty()) throw NumericalError("dft: series has no spectral weight");
    const Complex pole = std::polar(1.0, peaks.front());
    AmplitudeFit fit = fit_amplitudes(series, {pole});
    out.warnings = std::move(fit.warnings);
    modes = {DampedMode::from_pole(fit.amplitudes(0), pole)};
    RefineResult refined = refine_least_squares(series, modes, cfg.weights);
    if (refined.diverged) out.warnings.push_back("refinement diverged; kept DFT peak");
    modes = std::move(refined.modes);
  } else {
    PencilDiagnostics diag;
    modes = matrix_pencil(series, cfg.pencil, &diag);
    out.warnings = std::move(diag.warnings);
    if (cfg.method == EstimateMethod::pencil_refine) {
      RefineResult refined = refine_least_squares(series, modes, cfg.weights);
      if (refined.diverged)
        out.warnings.push_back("refinement diverged; kept pencil modes");
      modes = std::move(refined.modes);
    }
  }

  flag_near_degenerate(modes, series.size(), out.warnings);
  out.mode = select_mode(modes);
  out.value = out.mode.phase / series.dt;
  out.n_modes = modes.size();
  out.residual = model_residual(series, modes);
  return out;
}

}  // namespace aqem
