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
#include <stdexcept>

#include "doctest.h"

#include "aqem/complexity.hpp"
#include "aqem/random.hpp"

using namespace aqem;

namespace {

// f(x)^-2 = int_0^1 s^2 e^{-2 x s} ds, by composite Simpson in long double.
double f_by_quadrature(double x) {
  const int n = 40000;
  const long double h = 1.0L / n;
  long double sum = 0.0L;
  for (int i = 0; i <= n; ++i) {
    const long double s = i * h;
    const long double w = (i == 0 || i == n) ? 1.0L : (i % 2 ? 4.0L : 2.0L);
    sum += w * s * s * std::exp(-2.0L * x * s);
  }
  return static_cast<double>(1.0L / std::sqrt(sum * h / 3.0L));
}

long double direct_sum(double r, std::size_t L) {
  long double s = 0.0L;
  for (std::size_t k = 0; k < L; ++k) s += (long double)k * k * std::pow((long double)r, 2.0L * k);
  return s;
}

}  // namespace

TEST_CASE("f factor") {
  CHECK(f_factor(1e-9) == doctest::Approx(std::numbers::sqrt3).epsilon(1e-8));
  CHECK(std::abs(f_factor(1e-7) - std::numbers::sqrt3) < 1e-6);
  CHECK(f_factor(1.0) == doctest::Approx(3.5173153200198306).epsilon(1e-13));
  CHECK(f_factor(10.0) == doctest::Approx(63.24556760802003).epsilon(1e-13));
  for (double x : {1e-5, 1e-3, 0.1, 0.5, 0.99, 1.0, 1.01, 3.0, 20.0})
    CHECK(f_factor(x) == doctest::Approx(f_by_quadrature(x)).epsilon(1e-11));
  // Continuous across the small-x switch.
  CHECK(f_factor(1e-6) == doctest::Approx(f_factor(1.0000001e-6)).epsilon(1e-12));
  CHECK_THROWS_AS(f_factor(0.0), std::invalid_argument);
}

TEST_CASE("F factor") {
  CHECK(big_f(2.0, 1.5) == doctest::Approx(14.69693845669907).epsilon(1e-14));
  CHECK(std::abs(big_f(2.0, 1.5) - std::sqrt(1.5) / (1.0 / 6.0 * 0.5)) < 1e-12);
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const double c2 = 1.01 + 4 * uniform_real(rng);
    const double c1 = c2 + 0.01 + 4 * uniform_real(rng);
    CHECK(big_f(c1, c2) == doctest::Approx(big_f(c2, c1)).epsilon(1e-14));
    CHECK(big_f(c1, c2) > std::sqrt(2.0) * c2 / (c2 - 1.0));
  }
  CHECK_THROWS_AS(big_f(2.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(big_f(0.5, 2.0), std::invalid_argument);
}

TEST_CASE("phase standard deviation") {
  for (double r : {0.3, 0.9, 0.99, 0.999, 0.99999}) {
    for (std::size_t L : {2u, 10u, 100u, 2000u}) {
      const double oracle = 1.0 / std::sqrt(2.0 * 3.0 * 0.25 * static_cast<double>(direct_sum(r, L)));
      CHECK(sigma_omega(3.0, 0.5, r, L) == doctest::Approx(oracle).epsilon(1e-10));
      CHECK(sigma_omega_direct(3.0, 0.5, r, L) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
  // r -> 1: 1/sigma^2 -> 2 N_k C^2 L^3 / 3 (1 + O(1 - r)).
  const std::size_t L = 1000;
  const double limit = 2.0 * std::pow(L, 3) / 3.0;
  const double r = 1.0 - 1e-8;
  const double inv = 1.0 / std::pow(sigma_omega(1.0, 1.0, r, L), 2);
  CHECK(std::abs(inv / limit - 1.0) < 2e-3);
  // r << 1: the k = 1 term dominates.
  const double tiny = 1e-4;
  CHECK(1.0 / std::pow(sigma_omega(1.0, 1.0, tiny, 50), 2) ==
        doctest::Approx(2.0 * tiny * tiny).epsilon(1e-6));
  CHECK_THROWS_AS(sigma_omega(1, 1, 1.0, 10), std::invalid_argument);
}

TEST_CASE("total sample counts") {
  ComplexityInputs in;
  in.n_modes = 1;
  in.length = 2000;
  in.dt = 1e-4;  // T = 0.2
  in.d_ab = 1.0;
  in.noise_strength = 0.05;  // x = 0.01
  in.sigma_target = 1e-3;
  CHECK(in.x() == doctest::Approx(0.01));

  const double f = f_by_quadrature(0.01);
  const double expected = f * f / (0.2 * 0.2 * 1e-6);
  CHECK(total_samples(ComplexityStrategy::reshape_full, in) == doctest::Approx(expected).epsilon(1e-11));

  const double full = total_samples(ComplexityStrategy::reshape_full, in);
  in.c1 = 2.0;
  CHECK(total_samples(ComplexityStrategy::rescale_first, in) == doctest::Approx(16.0 * full).epsilon(1e-14));
  in.c2 = 1.5;
  CHECK(total_samples(ComplexityStrategy::rescale_second, in) ==
        doctest::Approx(3.0 * std::pow(big_f(2.0, 1.5), 2) * full).epsilon(1e-14));

  in.c_stat = 0.01;
  in.n_paulis = 1e4;
  const double floor = 0.01 * 0.05 * 0.05 / 1e4;
  CHECK(total_samples(ComplexityStrategy::reshape_sampled, in) ==
        doctest::Approx(full * 1e-6 / (1e-6 - floor)).epsilon(1e-12));
  in.n_paulis = 1;
  CHECK_THROWS_AS(total_samples(ComplexityStrategy::reshape_sampled, in), std::invalid_argument);

  in.noise_strength = 0.0;
  CHECK(total_samples(ComplexityStrategy::reshape_full, in) ==
        doctest::Approx(3.0 / (0.04 * 1e-6)).epsilon(1e-14));
}

TEST_CASE("reshaping always needs fewer samples than second-order rescaling") {
  Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    ComplexityInputs in;
    in.n_modes = 1 + static_cast<double>(uniform_index(rng, 10));
    in.length = 10 + uniform_index(rng, 5000);
    in.dt = 1e-5 + 1e-3 * uniform_real(rng);
    in.noise_strength = 10 * uniform_real(rng);
    in.d_ab = 0.1 + uniform_real(rng);
    in.sigma_target = 1e-4 + 1e-2 * uniform_real(rng);
    in.c2 = 1.05 + 3 * uniform_real(rng);
    in.c1 = *in.c2 + 0.05 + 3 * uniform_real(rng);
    CHECK(total_samples(ComplexityStrategy::reshape_full, in) <
          total_samples(ComplexityStrategy::rescale_second, in));
  }
}

TEST_CASE("exponential regime advisory") {
  ComplexityInputs in;
  in.n_modes = 2;
  in.length = 100;
  in.dt = 0.01;
  in.d_ab = 0.5;
  in.noise_strength = 30;
  in.sigma_target = 0.1;
  const double sw = 0.1 * 0.01;
  CHECK(exponential_regime_samples(in) ==
        doctest::Approx(4.0 * 100 * std::exp(2 * 0.5 * 30 * 0.01) / (2 * sw * sw)).epsilon(1e-14));
}

TEST_CASE("complexity inputs") {
  ComplexityInputs in;
  in.n_modes = 4;
  CHECK(in.amplitude() == 0.25);
  in.c_amp = 0.7;
  CHECK(in.amplitude() == 0.7);
  in.sigma_target = 0.0;
  CHECK_THROWS_AS(in.validate(), std::invalid_argument);
  CHECK(parse_complexity_strategy("rescale-second") == ComplexityStrategy::rescale_second);
  CHECK_THROWS_AS(parse_complexity_strategy("nope"), std::invalid_argument);
}
