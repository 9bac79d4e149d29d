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

#include "aqem/complexity.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aqem {

namespace {

// 1 - e^{-u}(1 + u + u^2/2) = e^{-u} sum_{j>=3} u^j / j!
double tail_numerator(double u) {
  if (u >= 2.0) return 1.0 - std::exp(-u) * (1.0 + u + 0.5 * u * u);
  double term = u * u * u / 6.0;
  double sum = 0.0;
  for (int j = 3; j < 60 && term > 1e-18 * sum; ++j) {
    sum += term;
    term *= u / (j + 1);
  }
  return std::exp(-u) * sum;
}

void require_positive(double v, const char *name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(name) + " must be positive and finite");
}

}  // namespace

void ComplexityInputs::validate() const {
  require_positive(n_modes, "N_m");
  require_positive(shots, "N_k");
  require_positive(n_paulis, "N_P");
  require_positive(dt, "dt");
  require_positive(d_ab, "d_ab");
  require_positive(sigma_target, "sigma_target");
  if (length < 1) throw std::invalid_argument("L must be >= 1");
  if (!(noise_strength >= 0.0)) throw std::invalid_argument("|D| must be >= 0");
  if (c_amp) require_positive(*c_amp, "C_amp");
  if (!(c_stat >= 0.0)) throw std::invalid_argument("C must be >= 0");
}

double f_factor(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("f_factor: x must be > 0");
  if (x <= 1e-6) return std::numbers::sqrt3 * (1.0 + 0.75 * x);
  const double g = tail_numerator(2.0 * x);
  return 1.0 / std::sqrt(g / (4.0 * x * x * x));
}

double big_f(double c1, double c2) {
  if (!(c1 > 1.0) || !(c2 > 1.0) || c1 == c2)
    throw std::invalid_argument("big_f: need c1, c2 > 1 and c1 != c2");
  const double num = std::sqrt((c2 - c1) * (c2 - c1) + (c1 - 1.0) * (c1 - 1.0) +
                               (c2 - 1.0) * (c2 - 1.0));
  return num / (std::abs(1.0 / c1 - 1.0 / c2) * (c1 - 1.0) * (c2 - 1.0));
}

double sigma_omega(double shots, double c_amp, double r, std::size_t length) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("sigma_omega: r must lie in (0, 1)");
  require_positive(shots, "N_k");
  require_positive(c_amp, "C_amp");
  const double q = r * r;
  const double L = static_cast<double>(length);
  const double p = 1.0 - q;
  // The closed form loses about 6 eps / (p L)^3 to cancellation; below
  // p L = 1/4 the direct sum is both short enough and more accurate.
  if (p * L < 0.25) return sigma_omega_direct(shots, c_amp, r, length);
  const double qL = std::exp(L * std::log(q));
  // sum_{k<L} k^2 q^k = [q(1+q) - q^L (L^2 p^2 + 2 L q p + q(1+q))] / p^3
  const double sum =
      (q * (1.0 + q) - qL * (L * L * p * p + 2.0 * L * q * p + q * (1.0 + q))) /
      (p * p * p);
  return 1.0 / std::sqrt(2.0 * shots * c_amp * c_amp * sum);
}

double sigma_omega_direct(double shots, double c_amp, double r,
                          std::size_t length) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("sigma_omega: r must lie in (0, 1)");
  require_positive(shots, "N_k");
  require_positive(c_amp, "C_amp");
  long double sum = 0.0L, qk = 1.0L;
  const long double q = static_cast<long double>(r) * r;
  for (std::size_t k = 0; k < length; ++k) {
    const long double kk = static_cast<long double>(k);
    sum += kk * kk * qk;
    qk *= q;
  }
  return 1.0 / std::sqrt(2.0 * shots * c_amp * c_amp * static_cast<double>(sum));
}

std::string to_string(ComplexityStrategy s) {
  switch (s) {
    case ComplexityStrategy::reshape_sampled: return "reshape-sampled";
    case ComplexityStrategy::reshape_full: return "reshape-full";
    case ComplexityStrategy::rescale_first: return "rescale-first";
    case ComplexityStrategy::rescale_second: return "rescale-second";
  }
  return "reshape-full";
}

ComplexityStrategy parse_complexity_strategy(std::string_view text) {
  if (text == "reshape-sampled") return ComplexityStrategy::reshape_sampled;
  if (text == "reshape-full") return ComplexityStrategy::reshape_full;
  if (text == "rescale-first") return ComplexityStrategy::rescale_first;
  if (text == "rescale-second") return ComplexityStrategy::rescale_second;
  throw std::invalid_argument(
      "unknown complexity strategy \"" + std::string(text) +
      "\" (expected reshape-sampled, reshape-full, rescale-first or rescale-second)");
}

double total_samples(ComplexityStrategy strategy, const ComplexityInputs &in) {
  in.validate();
  const double T = in.horizon();
  const double f = in.x() > 0.0 ? f_factor(in.x()) : std::numbers::sqrt3;
  const double base_num = f * f * in.n_modes * in.n_modes;
  const double sigma2 = in.sigma_target * in.sigma_target;
  const double full = base_num / (T * T * sigma2);
  switch (strategy) {
    case ComplexityStrategy::reshape_full: return full;
    case ComplexityStrategy::reshape_sampled: {
      const double floor =
          in.c_stat * in.noise_strength * in.noise_strength / in.n_paulis;
      if (!(sigma2 > floor))
        throw std::invalid_argument(
            "reshape-sampled: target variance must exceed C |D|^2 / N_P = " +
            std::to_string(floor));
      return base_num / (T * T * (sigma2 - floor));
    }
    case ComplexityStrategy::rescale_first: {
      if (!(in.c1 > 1.0)) throw std::invalid_argument("rescale-first: c1 must be > 1");
      const double c = in.c1;
      return 4.0 * c * c / ((c - 1.0) * (c - 1.0)) * full;
    }
    case ComplexityStrategy::rescale_second: {
      if (!in.c2) throw std::invalid_argument("rescale-second needs c2");
      const double F = big_f(in.c1, *in.c2);
      return 3.0 * F * F * full;
    }
  }
  return full;
}

double exponential_regime_samples(const ComplexityInputs &in) {
  in.validate();
  const double sigma_w = in.sigma_target * in.dt;
  return in.n_modes * in.n_modes * static_cast<double>(in.length) *
         std::exp(2.0 * in.d_ab * in.noise_strength * in.dt) /
         (2.0 * sigma_w * sigma_w);
}

}  // namespace aqem
