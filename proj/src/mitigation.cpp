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

#include "aqem/mitigation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "aqem/random.hpp"

namespace aqem {

namespace {

std::string format_factor(double c) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, c);
  return std::string(buf, res.ptr);
}

void check_factor(double c, const char *name) {
  if (!(c > 1.0))
    throw std::invalid_argument(std::string("rescale factor ") + name +
                                " must be > 1, got " + format_factor(c));
  if (c > RescaleConfig::kMaxFactor)
    throw std::invalid_argument(
        std::string("rescale factor ") + name + " = " + format_factor(c) +
        " exceeds 20; large factors amplify the noise beyond the "
        "perturbative regime");
}

void sort_raw(std::vector<std::pair<std::string, EnergyEstimate>> &raw) {
  std::stable_sort(raw.begin(), raw.end(),
                   [](const auto &x, const auto &y) { return x.first < y.first; });
}

// Runs each constituent, collecting estimates; on failure rethrows with the
// finished part attached.
std::vector<std::pair<std::string, EnergyEstimate>> run_constituents(
    const std::string &strategy, const CMatrix &H, const NoiseModel &noise,
    const PairObservable &obs, const SpectroscopyConfig &cfg,
    const std::vector<Constituent> &parts, const EstimatorConfig &est,
    Backend backend, std::vector<TimeSeries> *keep_series = nullptr) {
  std::vector<std::pair<std::string, EnergyEstimate>> raw;
  for (const auto &part : parts) {
    try {
      TimeSeries series = constituent_series(H, noise, obs, cfg, part, backend);
      raw.emplace_back(part.label(), estimate_energy(series, est));
      if (keep_series) keep_series->push_back(std::move(series));
    } catch (const std::exception &e) {
      MitigatedEstimate partial;
      partial.strategy = strategy;
      partial.raw = raw;
      sort_raw(partial.raw);
      throw MitigationError(strategy + ": constituent " + part.label() +
                                " failed: " + e.what(),
                            std::move(partial));
    }
  }
  return raw;
}

}  // namespace

ReshapeSet ReshapeSet::full_pauli_sample(std::size_t count, std::uint64_t seed) {
  ReshapeSet s;
  s.variant = Variant::full_pauli_sample;
  s.count = count;
  s.seed = seed;
  return s;
}

ReshapeSet ReshapeSet::tensor_power_4() {
  ReshapeSet s;
  s.variant = Variant::tensor_power_4;
  return s;
}

ReshapeSet ReshapeSet::tensor_power_2() {
  ReshapeSet s;
  s.variant = Variant::tensor_power_2;
  return s;
}

ReshapeSet ReshapeSet::explicit_set(std::vector<PauliString> strings) {
  ReshapeSet s;
  s.variant = Variant::explicit_list;
  s.strings = std::move(strings);
  return s;
}

void ReshapeSet::validate() const {
  if (variant == Variant::full_pauli_sample && count == 0)
    throw std::invalid_argument("full-pauli-sample reshape set needs count >= 1");
  if (variant == Variant::explicit_list && strings.empty())
    throw std::invalid_argument("explicit reshape set is empty");
}

std::vector<PauliString> ReshapeSet::realize(int n) const {
  validate();
  switch (variant) {
    case Variant::tensor_power_4:
      return {PauliString::identity(n), PauliString::uniform(Pauli::X, n),
              PauliString::uniform(Pauli::Y, n), PauliString::uniform(Pauli::Z, n)};
    case Variant::tensor_power_2:
      return {PauliString::identity(n), PauliString::uniform(Pauli::X, n)};
    case Variant::explicit_list:
      for (const auto &p : strings)
        if (p.size() != n)
          throw std::invalid_argument("reshape string " + p.str() + " has " +
                                      std::to_string(p.size()) + " qubits, expected " +
                                      std::to_string(n));
      return strings;
    case Variant::full_pauli_sample: {
      if (n > 31) throw std::invalid_argument("full-pauli-sample supports n <= 31");
      Rng rng(seed);
      const std::uint64_t total = std::uint64_t{1} << (2 * n);
      std::vector<PauliString> out;
      out.reserve(count);
      for (std::size_t i = 0; i < count; ++i)
        out.push_back(PauliString::from_index(uniform_index(rng, total), n));
      return out;
    }
  }
  return {};
}

std::string to_string(ReshapeSet::Variant variant) {
  switch (variant) {
    case ReshapeSet::Variant::full_pauli_sample: return "full-pauli-sample";
    case ReshapeSet::Variant::tensor_power_4: return "tensor-power-4";
    case ReshapeSet::Variant::tensor_power_2: return "tensor-power-2";
    case ReshapeSet::Variant::explicit_list: return "explicit";
  }
  return "tensor-power-4";
}

ReshapeSet::Variant parse_reshape_variant(std::string_view text) {
  if (text == "full-pauli-sample") return ReshapeSet::Variant::full_pauli_sample;
  if (text == "tensor-power-4") return ReshapeSet::Variant::tensor_power_4;
  if (text == "tensor-power-2") return ReshapeSet::Variant::tensor_power_2;
  if (text == "explicit") return ReshapeSet::Variant::explicit_list;
  throw std::invalid_argument(
      "unknown reshape set \"" + std::string(text) +
      "\" (expected full-pauli-sample, tensor-power-4, tensor-power-2 or explicit)");
}

void RescaleConfig::validate() const {
  check_factor(c1, "c1");
  if (c2) {
    check_factor(*c2, "c2");
    if (*c2 == c1) throw std::invalid_argument("rescale factors c1 and c2 must differ");
  }
}

ReshapedExperiment reshape_experiment(const CMatrix &H, const CVector &psi0,
                                      const PairObservable &obs,
                                      const PauliString &p) {
  const Eigen::Index dim = Eigen::Index{1} << p.size();
  if (H.rows() != dim || psi0.size() != dim || obs.a_state.size() != dim ||
      obs.b_state.size() != dim)
    throw std::invalid_argument("reshape_experiment: dimension mismatch for " +
                                std::to_string(p.size()) + "-qubit string");
  return ReshapedExperiment{
      conjugate(H, p), apply_pauli(p, psi0),
      PairObservable{apply_pauli(p, obs.a_state), apply_pauli(p, obs.b_state),
                     obs.scale}};
}

std::string Constituent::label() const {
  const bool reshaped = pauli.size() > 0 && !pauli.is_identity();
  const bool rescaled = factor != 1.0;
  if (!reshaped && !rescaled) return "base";
  std::string out;
  if (reshaped) out = "P:" + pauli.str();
  if (rescaled) out += (reshaped ? "," : "") + std::string("c:") + format_factor(factor);
  return out;
}

PreparedConstituent prepare_constituent(const CMatrix &H,
                                        const PairObservable &obs,
                                        const SpectroscopyConfig &cfg,
                                        const Constituent &constituent) {
  if (!(constituent.factor > 0.0))
    throw std::invalid_argument("constituent factor must be > 0");
  PreparedConstituent out{H, obs.initial_state(), obs, cfg};
  if (constituent.pauli.size() > 0 && !constituent.pauli.is_identity()) {
    ReshapedExperiment r =
        reshape_experiment(H, out.initial_state, obs, constituent.pauli);
    out.hamiltonian = std::move(r.hamiltonian);
    out.initial_state = std::move(r.initial_state);
    out.observable = std::move(r.observable);
  }
  if (constituent.factor != 1.0) {
    out.hamiltonian /= constituent.factor;
    out.cfg.dt = cfg.dt * constituent.factor;
  }
  return out;
}

TimeSeries constituent_series(const CMatrix &H, const NoiseModel &noise,
                              const PairObservable &obs,
                              const SpectroscopyConfig &cfg,
                              const Constituent &constituent, Backend backend) {
  const PreparedConstituent p = prepare_constituent(H, obs, cfg, constituent);
  return evolve_series(p.hamiltonian, noise, p.initial_state, p.observable,
                       p.cfg, backend);
}

MitigatedEstimate combine_reshaping(
    std::vector<std::pair<std::string, EnergyEstimate>> raw) {
  if (raw.empty()) throw std::invalid_argument("combine_reshaping: no estimates");
  MitigatedEstimate out;
  out.strategy = "reshape";
  sort_raw(raw);
  double sum = 0.0;
  for (const auto &[label, e] : raw) {
    sum += e.value;
    for (const auto &w : e.warnings) out.warnings.push_back(label + ": " + w);
  }
  out.value = sum / static_cast<double>(raw.size());
  out.raw = std::move(raw);
  return out;
}

MitigatedEstimate run_reshaping(const CMatrix &H, const NoiseModel &noise,
                                const PairObservable &obs,
                                const SpectroscopyConfig &cfg,
                                const ReshapeSet &set,
                                const EstimatorConfig &est, Backend backend) {
  const int n = qubit_count(H.rows());
  std::vector<Constituent> parts;
  for (auto &p : set.realize(n)) parts.push_back(Constituent{std::move(p), 1.0});
  // Repeated strings (sampling with replacement) each count once per draw.
  std::vector<std::pair<std::string, EnergyEstimate>> raw =
      run_constituents("reshape", H, noise, obs, cfg, parts, est, backend);
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i].first = std::to_string(i) + ":" + raw[i].first;
  return combine_reshaping(std::move(raw));
}

double rescale_first(double e0, double e1, double c) {
  if (!(c > 1.0)) throw std::invalid_argument("rescale_first: c must be > 1");
  return c / (c - 1.0) * (e0 - e1);
}

double rescale_second(double e0, double e1, double e2, double c1, double c2) {
  if (!(c1 > 1.0) || !(c2 > 1.0) || c1 == c2)
    throw std::invalid_argument("rescale_second: need c1, c2 > 1 and c1 != c2");
  const double num = (1.0 - c2) * (e1 - e0) + (c1 - 1.0) * (e2 - e0);
  const double den = (c2 - c1) * (c1 - 1.0) * (c2 - 1.0);
  return c1 * c2 * num / den;
}

MitigatedEstimate combine_rescaling(const EnergyEstimate &e0,
                                    const EnergyEstimate &e1,
                                    const EnergyEstimate *e2,
                                    const RescaleConfig &rc, RescaleOrder order) {
  rc.validate();
  MitigatedEstimate out;
  out.raw.emplace_back("base", e0);
  out.raw.emplace_back(Constituent{{}, rc.c1}.label(), e1);
  if (order == RescaleOrder::first) {
    out.strategy = "rescale1";
    out.value = rescale_first(e0.value, e1.value, rc.c1);
  } else {
    if (!rc.c2 || !e2)
      throw std::invalid_argument("second-order rescaling needs c2 and its estimate");
    out.strategy = "rescale2";
    out.raw.emplace_back(Constituent{{}, *rc.c2}.label(), *e2);
    out.value = rescale_second(e0.value, e1.value, e2->value, rc.c1, *rc.c2);
  }
  const std::size_t modes = out.raw.front().second.n_modes;
  for (const auto &[label, e] : out.raw) {
    for (const auto &w : e.warnings) out.warnings.push_back(label + ": " + w);
    if (e.n_modes != modes)
      out.warnings.push_back("retained mode count differs across factors (" +
                             label + " keeps " + std::to_string(e.n_modes) +
                             ", base keeps " + std::to_string(modes) + ")");
  }
  sort_raw(out.raw);
  return out;
}

MitigatedEstimate run_rescaling(const CMatrix &H, const NoiseModel &noise,
                                const PairObservable &obs,
                                const SpectroscopyConfig &cfg,
                                const RescaleConfig &rc, RescaleOrder order,
                                const EstimatorConfig &est, Backend backend) {
  rc.validate();
  if (order == RescaleOrder::second && !rc.c2)
    throw std::invalid_argument("second-order rescaling needs c2");
  std::vector<Constituent> parts = {{{}, 1.0}, {{}, rc.c1}};
  if (order == RescaleOrder::second) parts.push_back({{}, *rc.c2});
  const std::string name = order == RescaleOrder::first ? "rescale1" : "rescale2";
  const auto raw = run_constituents(name, H, noise, obs, cfg, parts, est, backend);
  return combine_rescaling(raw[0].second, raw[1].second,
                           raw.size() > 2 ? &raw[2].second : nullptr, rc, order);
}

TimeSeries richardson_series(const std::vector<TimeSeries> &series,
                             const RescaleConfig &rc) {
  rc.validate();
  const std::size_t want = rc.c2 ? 3 : 2;
  if (series.size() != want)
    throw std::invalid_argument("richardson_series: expected " +
                                std::to_string(want) + " series, got " +
                                std::to_string(series.size()));
  const std::size_t L = series.front().size();
  for (const auto &s : series)
    if (s.size() != L) throw std::invalid_argument("richardson_series: length mismatch");

  double w0, w1, w2 = 0.0;
  const double c1 = rc.c1;
  if (!rc.c2) {
    w0 = c1 / (c1 - 1.0);
    w1 = -1.0 / (c1 - 1.0);
  } else {
    const double c2 = *rc.c2;
    w0 = c1 * c2 / ((c1 - 1.0) * (c2 - 1.0));
    w1 = c2 / ((c1 - c2) * (c1 - 1.0));
    w2 = -c1 / ((c2 - 1.0) * (c1 - c2));
  }
  TimeSeries out;
  out.dt = series.front().dt;
  out.samples.resize(L);
  for (std::size_t k = 0; k < L; ++k) {
    out.samples[k] = w0 * series[0].samples[k] + w1 * series[1].samples[k];
    if (rc.c2) out.samples[k] += w2 * series[2].samples[k];
  }
  return out;
}

MitigatedEstimate run_richardson(const CMatrix &H, const NoiseModel &noise,
                                 const PairObservable &obs,
                                 const SpectroscopyConfig &cfg,
                                 const RescaleConfig &rc,
                                 const EstimatorConfig &est, Backend backend) {
  rc.validate();
  std::vector<TimeSeries> series;
  for (double c : {1.0, rc.c1, rc.c2.value_or(0.0)}) {
    if (c == 0.0) continue;
    Constituent part{{}, c};
    try {
      series.push_back(constituent_series(H, noise, obs, cfg, part, backend));
    } catch (const std::exception &e) {
      MitigatedEstimate partial;
      partial.strategy = "richardson";
      throw MitigationError("richardson: constituent " + part.label() +
                                " failed: " + e.what(),
                            std::move(partial));
    }
  }
  MitigatedEstimate out;
  out.strategy = "richardson";
  EnergyEstimate e = estimate_energy(richardson_series(series, rc), est);
  out.value = e.value;
  out.warnings = e.warnings;
  out.raw.emplace_back("richardson", std::move(e));
  return out;
}

std::vector<Complex> reshaped_first_order_shifts(
    const NoiseModel &noise, const CVector &a_state, const CVector &b_state,
    const std::vector<PauliString> &strings) {
  std::vector<Complex> out;
  out.reserve(strings.size());
  for (const auto &p : strings)
    out.push_back(first_order_shift(noise, apply_pauli(p, a_state),
                                    apply_pauli(p, b_state)));
  return out;
}

Complex twirled_first_order_shift(const NoiseModel &noise,
                                  const CVector &a_state, const CVector &b_state,
                                  const std::vector<PauliString> &strings) {
  if (strings.empty()) throw std::invalid_argument("twirl over an empty set");
  Complex sum{0.0, 0.0};
  for (const auto &z : reshaped_first_order_shifts(noise, a_state, b_state, strings))
    sum += z;
  return sum / static_cast<double>(strings.size());
}

}  // namespace aqem
