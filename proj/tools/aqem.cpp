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

// Command line front end: aqem <subcommand> [options].
// Exit status: 0 success, 1 a run failed, 2 bad configuration or usage.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "aqem/complexity.hpp"
#include "aqem/experiment.hpp"
#include "aqem/lindblad.hpp"
#include "aqem/mitigation.hpp"
#include "aqem/operators.hpp"
#include "aqem/spectral.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace aqem;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<unsigned> threads;
  std::string backend;
};

struct PairOptions {
  int a = -1;
  int b = -1;
  double gamma = 0.0;
};

ExperimentConfig resolve_config(const GlobalOptions &g) {
  if (g.config.empty()) throw ConfigError("--config: required by this subcommand");
  ExperimentConfig cfg = load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (!g.backend.empty()) {
    try {
      cfg.backend = parse_backend(g.backend);
    } catch (const std::invalid_argument &e) {
      throw ConfigError(std::string("--backend: ") + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

// Everything a single-pair subcommand needs.
struct PairSetup {
  ExperimentConfig cfg;
  CMatrix H;
  Spectrum spectrum;
  NoiseModel noise;
  PairObservable obs;
  SpectroscopyConfig spec;
  double e_exact = 0.0;
};

PairSetup setup_pair(const GlobalOptions &g, const PairOptions &p) {
  PairSetup s{resolve_config(g), {}, {}, {}, {}, {}, 0.0};
  s.H = build_hamiltonian(s.cfg.model);
  s.spectrum = diagonalize(s.H);
  if (p.a < 0 || p.b < 0 || p.a >= s.spectrum.dim() || p.b >= s.spectrum.dim() || p.a == p.b)
    throw ConfigError("--a/--b: need distinct eigenstate indices below " +
                      std::to_string(s.spectrum.dim()));
  if (!(p.gamma >= 0.0)) throw ConfigError("--gamma: must be >= 0");
  s.e_exact = s.spectrum.energies(p.b) - s.spectrum.energies(p.a);
  s.noise = build_noise(s.cfg.noise_kind, p.gamma * std::abs(s.e_exact), s.cfg.beta,
                        s.cfg.model.n);
  s.obs = pair_observable(s.spectrum, p.a, p.b);
  s.spec = SpectroscopyConfig{s.cfg.dt, s.cfg.length};
  if (s.spec.aliases(s.spectrum))
    std::cerr << "warning: dt * max|E_l - E_m| >= pi, frequencies may alias\n";
  return s;
}

EstimatorConfig estimator_for(const ExperimentConfig &cfg, Strategy s) {
  EstimatorConfig est;
  est.method = cfg.estimator;
  est.pencil.cutoff = cfg.cutoffs.for_strategy(s);
  return est;
}

json estimate_json(const EnergyEstimate &e) {
  json j;
  j["value"] = e.value;
  j["omega"] = e.mode.phase;
  j["decay"] = e.mode.decay;
  j["amplitude"] = {e.mode.amplitude.real(), e.mode.amplitude.imag()};
  j["method"] = to_string(e.method);
  j["residual"] = e.residual;
  j["n_modes"] = e.n_modes;
  j["warnings"] = e.warnings;
  return j;
}

json mitigated_json(const MitigatedEstimate &m, double e_exact) {
  json j;
  j["strategy"] = m.strategy;
  j["value"] = m.value;
  j["E_exact"] = e_exact;
  j["abs_error"] = std::abs(m.value - e_exact);
  j["rel_error"] = std::abs(m.value - e_exact) / std::abs(e_exact);
  json raw = json::object();
  for (const auto &[label, e] : m.raw) raw[label] = estimate_json(e);
  j["raw"] = raw;
  j["warnings"] = m.warnings;
  return j;
}

void emit(const GlobalOptions &g, const std::string &file, const std::string &text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(g.out);
  const auto path = std::filesystem::path(g.out) / file;
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
  std::cerr << "wrote " << path.string() << "\n";
}

void add_pair_options(CLI::App *cmd, PairOptions &p) {
  cmd->add_option("--a", p.a, "Index of the lower eigenstate")->required();
  cmd->add_option("--b", p.b, "Index of the upper eigenstate")->required();
  cmd->add_option("--gamma", p.gamma, "Relative noise strength, kappa = gamma |E_ba|");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Noisy analog quantum simulation: spectroscopy and error mitigation"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "Experiment configuration (JSON)");
  app.add_option("--seed", g.seed, "Override the master seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--backend", g.backend, "stepper or spectral");

  PairOptions pair;
  auto *spectrum_cmd = app.add_subcommand("spectrum", "Exact eigenenergies of the model");

  auto *series_cmd = app.add_subcommand("series", "Noisy time series of one eigenpair");
  add_pair_options(series_cmd, pair);
  std::string pauli;
  double factor = 1.0;
  series_cmd->add_option("--pauli", pauli, "Reshape with this Pauli string");
  series_cmd->add_option("--factor", factor, "Rescale H by 1/factor and dt by factor");

  auto *estimate_cmd = app.add_subcommand("estimate", "Unmitigated energy estimate");
  add_pair_options(estimate_cmd, pair);

  auto *reshape_cmd = app.add_subcommand("reshape", "Hamiltonian reshaping");
  add_pair_options(reshape_cmd, pair);

  auto *rescale_cmd = app.add_subcommand("rescale", "Hamiltonian rescaling");
  add_pair_options(rescale_cmd, pair);
  int order = 1;
  rescale_cmd->add_option("--order", order, "1 or 2")->check(CLI::IsMember({1, 2}));

  auto *richardson_cmd = app.add_subcommand("richardson", "Pointwise Richardson baseline");
  add_pair_options(richardson_cmd, pair);

  auto *sweep_cmd = app.add_subcommand("sweep", "Pairs x gamma x strategies sweep");

  auto *complexity_cmd = app.add_subcommand("complexity", "Sample-count formulas");
  ComplexityInputs ci;
  double c2 = 0.0;
  double c_amp = 0.0;
  complexity_cmd->add_option("--nm", ci.n_modes, "Number of modes N_m");
  complexity_cmd->add_option("--nk", ci.shots, "Shots per time point N_k");
  complexity_cmd->add_option("--np", ci.n_paulis, "Number of reshaping strings N_P");
  complexity_cmd->add_option("--length", ci.length, "Time points L");
  complexity_cmd->add_option("--dt", ci.dt, "Time step");
  complexity_cmd->add_option("--noise", ci.noise_strength, "Noise strength |D|");
  complexity_cmd->add_option("--dab", ci.d_ab, "Normalized decay coefficient d_ab");
  complexity_cmd->add_option("--camp", c_amp, "Mode amplitude |C| (default 1/N_m)");
  complexity_cmd->add_option("--sigma", ci.sigma_target, "Target energy standard deviation");
  complexity_cmd->add_option("--c1", ci.c1, "Rescale factor c1");
  complexity_cmd->add_option("--c2", c2, "Rescale factor c2");
  complexity_cmd->add_option("--cstat", ci.c_stat,
                             "Twirled-bias variance constant C (N_P var(Im bias)/|D|^2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (spectrum_cmd->parsed()) {
      const ExperimentConfig cfg = resolve_config(g);
      const Spectrum s = diagonalize(build_hamiltonian(cfg.model));
      std::string text = "index,energy\n";
      for (Eigen::Index j = 0; j < s.dim(); ++j)
        text += std::to_string(j) + "," + format_number(s.energies(j)) + "\n";
      emit(g, "spectrum.csv", text);
      return 0;
    }
    if (series_cmd->parsed()) {
      const PairSetup s = setup_pair(g, pair);
      Constituent c;
      if (!pauli.empty()) c.pauli = PauliString::parse(pauli);
      c.factor = factor;
      const TimeSeries ts =
          constituent_series(s.H, s.noise, s.obs, s.spec, c, s.cfg.backend);
      emit(g, "series.csv", series_csv(ts));
      return 0;
    }
    if (estimate_cmd->parsed()) {
      const PairSetup s = setup_pair(g, pair);
      const TimeSeries ts = evolve_series(s.H, s.noise, s.obs.initial_state(), s.obs,
                                          s.spec, s.cfg.backend);
      MitigatedEstimate m;
      m.strategy = "none";
      EnergyEstimate e = estimate_energy(ts, estimator_for(s.cfg, Strategy::none));
      m.value = e.value;
      m.raw.emplace_back("base", std::move(e));
      emit(g, "estimate.json", mitigated_json(m, s.e_exact).dump(2) + "\n");
      return 0;
    }
    if (reshape_cmd->parsed()) {
      const PairSetup s = setup_pair(g, pair);
      ReshapeSet set;
      set.variant = s.cfg.reshape.variant;
      set.count = s.cfg.reshape.count;
      set.seed = s.cfg.seed;
      for (const auto &str : s.cfg.reshape.strings) set.strings.push_back(PauliString::parse(str));
      const MitigatedEstimate m =
          run_reshaping(s.H, s.noise, s.obs, s.spec, set,
                        estimator_for(s.cfg, Strategy::reshape), s.cfg.backend);
      emit(g, "reshape.json", mitigated_json(m, s.e_exact).dump(2) + "\n");
      return 0;
    }
    if (rescale_cmd->parsed()) {
      const PairSetup s = setup_pair(g, pair);
      const Strategy st = order == 1 ? Strategy::rescale1 : Strategy::rescale2;
      const MitigatedEstimate m = run_rescaling(
          s.H, s.noise, s.obs, s.spec, s.cfg.rescale,
          order == 1 ? RescaleOrder::first : RescaleOrder::second,
          estimator_for(s.cfg, st), s.cfg.backend);
      emit(g, "rescale.json", mitigated_json(m, s.e_exact).dump(2) + "\n");
      return 0;
    }
    if (richardson_cmd->parsed()) {
      const PairSetup s = setup_pair(g, pair);
      const MitigatedEstimate m =
          run_richardson(s.H, s.noise, s.obs, s.spec, s.cfg.rescale,
                         estimator_for(s.cfg, Strategy::richardson), s.cfg.backend);
      emit(g, "richardson.json", mitigated_json(m, s.e_exact).dump(2) + "\n");
      return 0;
    }
    if (sweep_cmd->parsed()) {
      const ExperimentConfig cfg = resolve_config(g);
      std::cerr << serialize_config(cfg);
      const SweepResult result = run_sweep(cfg);
      write_outputs(result, cfg, cfg.output_dir);
      for (const auto &w : result.summary.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto &[name, s] : result.summary.strategies) {
        std::cout << name << ": slope ";
        if (s.slope) std::cout << *s.slope; else std::cout << "n/a";
        std::cout << "\n";
      }
      std::cerr << "wrote " << cfg.output_dir << "/runs.csv and summary.json ("
                << result.records.size() << " runs, " << result.summary.failures
                << " failed)\n";
      return result.summary.failures == 0 ? 0 : 1;
    }
    if (complexity_cmd->parsed()) {
      if (c2 > 0.0) ci.c2 = c2;
      if (c_amp > 0.0) ci.c_amp = c_amp;
      try {
        ci.validate();
      } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("complexity: ") + e.what());
      }
      json j;
      j["x"] = ci.x();
      j["f"] = ci.x() > 0.0 ? f_factor(ci.x()) : std::sqrt(3.0);
      json totals;
      for (auto st : {ComplexityStrategy::reshape_full, ComplexityStrategy::reshape_sampled,
                      ComplexityStrategy::rescale_first, ComplexityStrategy::rescale_second}) {
        try {
          totals[to_string(st)] = total_samples(st, ci);
        } catch (const std::invalid_argument &e) {
          totals[to_string(st)] = std::string("n/a: ") + e.what();
        }
      }
      j["N_T"] = totals;
      j["exponential_regime_advisory"] = exponential_regime_samples(ci);
      emit(g, "complexity.json", j.dump(2) + "\n");
      return 0;
    }
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
