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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aqem/lindblad.hpp"
#include "aqem/mitigation.hpp"
#include "aqem/operators.hpp"
#include "aqem/spectral.hpp"

namespace aqem {

/// Invalid configuration document. The message starts with the key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Strategy { none, reshape, rescale1, rescale2, richardson };

std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

struct PairSelection {
  std::size_t count = 10;
  std::optional<std::uint64_t> seed;  // defaults to the master seed
  std::vector<std::pair<int, int>> explicit_pairs;
};

struct ReshapeSpec {
  ReshapeSet::Variant variant = ReshapeSet::Variant::tensor_power_4;
  std::size_t count = 0;             // full-pauli-sample
  std::vector<std::string> strings;  // explicit
};

struct CutoffConfig {
  double none = 1e-10;
  double reshape = 1e-10;
  double rescale = 1e-2;
  double richardson = 1e-2;

  double for_strategy(Strategy s) const;
};

///
/// A sweep over eigenpairs, relative noise strengths gamma (kappa =
/// gamma |E_ba|) and mitigation strategies. The document format is JSON;
/// see README for the key list.
///
struct ExperimentConfig {
  HamiltonianSpec model;
  NoiseKind noise_kind = NoiseKind::paper_default;
  double beta = 0.01;
  double dt = 1e-4;
  std::size_t length = 2000;
  PairSelection pairs;
  std::vector<double> gammas = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  std::vector<Strategy> strategies = {Strategy::none};
  ReshapeSpec reshape;
  RescaleConfig rescale{2.0, 1.5};
  Backend backend = Backend::spectral;
  EstimateMethod estimator = EstimateMethod::pencil;
  CutoffConfig cutoffs;
  std::optional<double> min_gap;  // default 1e-6 * max|E|
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string output_dir = "out";
  bool dump_series = false;

  /// Throws ConfigError.
  void validate() const;
  double resolved_min_gap(const Spectrum &spectrum) const;
  std::uint64_t pair_seed() const { return pairs.seed.value_or(seed); }
};

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path &path);
/// Every field, defaults included, as a JSON document.
std::string serialize_config(const ExperimentConfig &cfg);

/// Pairs a < b with |E_ba| >= min_gap and no spectator transition (p, m)
/// with |E_ba - (E_m - E_p)| < min_gap, in lexicographic order.
std::vector<std::pair<int, int>> eligible_pairs(const Spectrum &spectrum,
                                                double min_gap);

/// `count` distinct eligible pairs drawn uniformly (partial Fisher-Yates).
/// Throws std::invalid_argument when fewer are eligible.
std::vector<std::pair<int, int>> sample_pairs(const Spectrum &spectrum,
                                              std::size_t count,
                                              std::uint64_t seed,
                                              double min_gap);

struct RunRecord {
  std::string run_id;
  std::string model;
  int n = 0;
  int a = 0;
  int b = 0;
  double e_exact = 0.0;
  double gamma = 0.0;
  double kappa = 0.0;
  std::string strategy;
  std::string variant;
  double estimate = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;
  double decay = 0.0;
  std::size_t n_modes = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string message;  // failure reason or joined warnings
  TimeSeries series;    // filled only when dumping
};

struct StrategySummary {
  std::vector<double> gammas;
  std::vector<double> mean_rel_error;
  std::vector<double> mean_abs_error;
  std::vector<std::size_t> runs;
  std::optional<double> slope;
};

struct SweepSummary {
  std::map<std::string, StrategySummary> strategies;
  std::vector<std::pair<int, int>> pairs;
  std::size_t eligible_pairs = 0;
  double min_gap = 0.0;
  std::size_t failures = 0;
  std::vector<std::string> warnings;
  /// run_id -> failure reason or estimator warnings.
  std::map<std::string, std::string> run_messages;
};

struct SweepResult {
  std::vector<RunRecord> records;
  SweepSummary summary;
};

/// Runs every (pair, gamma, strategy) combination on `cfg.threads` workers.
/// Output is independent of the worker count.
SweepResult run_sweep(const ExperimentConfig &cfg);

/// Least-squares slope of log(errors) against log(gammas). Needs >= 3
/// points, all positive.
double fit_loglog_slope(const std::vector<double> &gammas,
                        const std::vector<double> &errors);

/// Per-(strategy, gamma) aggregates and slopes over gamma > 0.
std::map<std::string, StrategySummary> summarize(const std::vector<RunRecord> &records);

inline constexpr std::string_view kRunsHeader =
    "run_id,model,n,a,b,E_exact,gamma,kappa,strategy,variant,estimate,"
    "abs_error,rel_error,decay,n_modes,seed";

/// 17 significant digits, enough to round-trip any double.
std::string format_number(double v);

std::string runs_csv(const std::vector<RunRecord> &records);
std::string summary_json(const SweepSummary &summary, const ExperimentConfig &cfg);
std::string series_csv(const TimeSeries &series);

/// Writes runs.csv, summary.json and (when enabled) series_<run_id>.csv.
void write_outputs(const SweepResult &result, const ExperimentConfig &cfg,
                   const std::filesystem::path &dir);

}  // namespace aqem
