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

#include "aqem/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "aqem/random.hpp"

namespace aqem {

namespace {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config parsing helpers. Every error names the offending key path.

[[noreturn]] void fail(const std::string &path, const std::string &what) {
  throw ConfigError(path + ": " + what);
}

std::string join(const std::string &path, const std::string &key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json &obj, const std::string &path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto &[key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(join(path, key), "unknown key");
  }
}

double get_number(const json &obj, const std::string &path, const char *key) {
  const json &v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  return v.get<double>();
}

std::int64_t get_integer(const json &obj, const std::string &path, const char *key) {
  const json &v = obj.at(key);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t get_unsigned(const json &obj, const std::string &path, const char *key) {
  const json &v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0))
    fail(join(path, key), "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json &obj, const std::string &path, const char *key) {
  const json &v = obj.at(key);
  if (!v.is_string()) fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json &obj, const std::string &path, const char *key) {
  const json &v = obj.at(key);
  if (!v.is_boolean()) fail(join(path, key), "expected true or false");
  return v.get<bool>();
}

template <class F>
auto parse_enum(const json &obj, const std::string &path, const char *key, F parser) {
  const std::string text = get_string(obj, path, key);
  try {
    return parser(text);
  } catch (const std::invalid_argument &e) {
    fail(join(path, key), e.what());
  }
}

void require(const json &obj, const std::string &path, const char *key) {
  if (!obj.contains(key)) fail(join(path, key), "missing required key");
}

HamiltonianSpec parse_model(const json &m, const std::string &path) {
  HamiltonianSpec spec;
  require(m, path, "variant");
  spec.variant = parse_enum(m, path, "variant", parse_model_variant);
  require(m, path, "n");
  if (spec.variant == ModelVariant::ring) {
    check_keys(m, path, {"variant", "n", "nu_z", "nu_x", "J"});
    for (const char *k : {"nu_z", "nu_x", "J"}) require(m, path, k);
    spec.nu_z = get_number(m, path, "nu_z");
    spec.nu_x = get_number(m, path, "nu_x");
    spec.J = get_number(m, path, "J");
  } else {
    check_keys(m, path, {"variant", "n", "g"});
    require(m, path, "g");
    spec.g = get_number(m, path, "g");
  }
  const std::int64_t n = get_integer(m, path, "n");
  if (n < 2 || n > 10) fail(join(path, "n"), "must lie in [2, 10]");
  spec.n = static_cast<int>(n);
  return spec;
}

double parse_positive(const json &obj, const std::string &path, const char *key) {
  const double v = get_number(obj, path, key);
  if (!(v > 0.0) || !std::isfinite(v)) fail(join(path, key), "must be positive");
  return v;
}

// ---------------------------------------------------------------------------
// Sweep machinery.

double strategy_cutoff(const ExperimentConfig &cfg, Strategy s) {
  return cfg.cutoffs.for_strategy(s);
}

std::string strategy_variant(const ExperimentConfig &cfg, Strategy s) {
  switch (s) {
    case Strategy::none: return to_string(cfg.estimator);
    case Strategy::reshape:
      if (cfg.reshape.variant == ReshapeSet::Variant::full_pauli_sample)
        return "full-pauli-sample:" + std::to_string(cfg.reshape.count);
      if (cfg.reshape.variant == ReshapeSet::Variant::explicit_list)
        return "explicit:" + std::to_string(cfg.reshape.strings.size());
      return to_string(cfg.reshape.variant);
    case Strategy::rescale1: return "c1=" + format_number(cfg.rescale.c1);
    case Strategy::rescale2:
    case Strategy::richardson:
      if (!cfg.rescale.c2) return "c1=" + format_number(cfg.rescale.c1);
      return "c1=" + format_number(cfg.rescale.c1) +
             ";c2=" + format_number(*cfg.rescale.c2);
  }
  return "";
}

ReshapeSet make_reshape_set(const ReshapeSpec &spec, std::uint64_t seed) {
  switch (spec.variant) {
    case ReshapeSet::Variant::full_pauli_sample:
      return ReshapeSet::full_pauli_sample(spec.count, seed);
    case ReshapeSet::Variant::tensor_power_4: return ReshapeSet::tensor_power_4();
    case ReshapeSet::Variant::tensor_power_2: return ReshapeSet::tensor_power_2();
    case ReshapeSet::Variant::explicit_list: {
      std::vector<PauliString> strings;
      for (const auto &s : spec.strings) strings.push_back(PauliString::parse(s));
      return ReshapeSet::explicit_set(std::move(strings));
    }
  }
  return ReshapeSet::tensor_power_4();
}

// Noiseless propagators depend only on the constituent, so every task at
// gamma = 0 can share them.
class SharedPropagators {
 public:
  std::shared_ptr<const Propagator> get(const std::string &label,
                                        const PreparedConstituent &p,
                                        const NoiseModel &noise, Backend backend) {
    std::promise<std::shared_ptr<const Propagator>> promise;
    std::shared_future<std::shared_ptr<const Propagator>> future;
    bool owner = false;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(label);
      if (it == cache_.end()) {
        future = promise.get_future().share();
        cache_.emplace(label, future);
        owner = true;
      } else {
        future = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(
            make_propagator(p.hamiltonian, noise, p.cfg.dt, backend));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return future.get();
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_future<std::shared_ptr<const Propagator>>> cache_;
};

struct SweepContext {
  const ExperimentConfig &cfg;
  CMatrix H;
  Spectrum spectrum;
  std::vector<std::pair<int, int>> pairs;
  SharedPropagators noiseless;
};

class TaskRunner {
 public:
  TaskRunner(SweepContext &ctx, std::size_t pair_index, std::size_t gamma_index)
      : ctx_(ctx),
        cfg_(ctx.cfg),
        pair_index_(pair_index),
        gamma_index_(gamma_index),
        a_(ctx.pairs[pair_index].first),
        b_(ctx.pairs[pair_index].second),
        e_exact_(ctx.spectrum.energies(b_) - ctx.spectrum.energies(a_)),
        gamma_(cfg_.gammas[gamma_index]),
        kappa_(gamma_ * std::abs(e_exact_)),
        noise_(build_noise(cfg_.noise_kind, kappa_, cfg_.beta, cfg_.model.n)),
        obs_(pair_observable(ctx.spectrum, a_, b_)) {}

  std::vector<RunRecord> run() {
    std::vector<RunRecord> out;
    for (std::size_t s = 0; s < cfg_.strategies.size(); ++s)
      out.push_back(run_strategy(s));
    return out;
  }

 private:
  const TimeSeries &series(const Constituent &c) {
    const std::string label = c.label();
    auto it = series_.find(label);
    if (it != series_.end()) return it->second;
    const SpectroscopyConfig spec{cfg_.dt, cfg_.length};
    const PreparedConstituent p = prepare_constituent(ctx_.H, obs_, spec, c);
    std::shared_ptr<const Propagator> prop;
    if (kappa_ == 0.0)
      prop = ctx_.noiseless.get(label, p, noise_, cfg_.backend);
    else
      prop = make_propagator(p.hamiltonian, noise_, p.cfg.dt, cfg_.backend);
    TimeSeries ts = evolve_series(*prop, p.initial_state, p.observable, cfg_.length);
    return series_.emplace(label, std::move(ts)).first->second;
  }

  const EnergyEstimate &estimate(const std::string &key, const TimeSeries &ts,
                                 double cutoff) {
    const auto cache_key = std::make_pair(key, cutoff);
    auto it = estimates_.find(cache_key);
    if (it != estimates_.end()) return it->second;
    EstimatorConfig est;
    est.pencil.cutoff = cutoff;
    est.method = cfg_.estimator;
    return estimates_.emplace(cache_key, estimate_energy(ts, est)).first->second;
  }

  const EnergyEstimate &constituent_estimate(const Constituent &c, double cutoff) {
    return estimate(c.label(), series(c), cutoff);
  }

  RunRecord run_strategy(std::size_t s_index) {
    const Strategy s = cfg_.strategies[s_index];
    RunRecord r;
    r.run_id = std::to_string(pair_index_) + "-" + std::to_string(gamma_index_) +
               "-" + to_string(s);
    r.model = to_string(cfg_.model.variant);
    r.n = cfg_.model.n;
    r.a = a_;
    r.b = b_;
    r.e_exact = e_exact_;
    r.gamma = gamma_;
    r.kappa = kappa_;
    r.strategy = to_string(s);
    r.variant = strategy_variant(cfg_, s);
    r.seed = derive_seed(cfg_.seed, {pair_index_, gamma_index_,
                                     static_cast<std::uint64_t>(s)});
    try {
      const MitigatedEstimate m = mitigate(s, r.seed, r);
      r.estimate = m.value;
      const EnergyEstimate *ref = &m.raw.front().second;
      for (const auto &[label, e] : m.raw)
        if (label == "base" || label.ends_with(":base")) ref = &e;
      r.decay = ref->mode.decay;
      r.n_modes = ref->n_modes;
      r.abs_error = std::abs(r.estimate - r.e_exact);
      r.rel_error = r.abs_error / std::abs(r.e_exact);
      std::ostringstream msg;
      for (std::size_t i = 0; i < m.warnings.size(); ++i)
        msg << (i ? "; " : "") << m.warnings[i];
      r.message = msg.str();
    } catch (const std::exception &e) {
      r.failed = true;
      r.estimate = r.abs_error = r.rel_error = r.decay =
          std::numeric_limits<double>::quiet_NaN();
      r.message = e.what();
    }
    return r;
  }

  MitigatedEstimate mitigate(Strategy s, std::uint64_t seed, RunRecord &record) {
    const double cutoff = strategy_cutoff(cfg_, s);
    const Constituent base{{}, 1.0};
    const RescaleConfig &rc = cfg_.rescale;
    switch (s) {
      case Strategy::none: {
        MitigatedEstimate m;
        m.strategy = "none";
        const EnergyEstimate &e = constituent_estimate(base, cutoff);
        m.value = e.value;
        m.warnings = e.warnings;
        m.raw.emplace_back("base", e);
        if (cfg_.dump_series) record.series = series(base);
        return m;
      }
      case Strategy::reshape: {
        const auto strings = make_reshape_set(cfg_.reshape, seed).realize(cfg_.model.n);
        std::vector<std::pair<std::string, EnergyEstimate>> raw;
        for (std::size_t u = 0; u < strings.size(); ++u) {
          const Constituent c{strings[u], 1.0};
          raw.emplace_back(std::to_string(u) + ":" + c.label(),
                           constituent_estimate(c, cutoff));
        }
        if (cfg_.dump_series) record.series = series(base);
        return combine_reshaping(std::move(raw));
      }
      case Strategy::rescale1:
      case Strategy::rescale2: {
        const bool second = s == Strategy::rescale2;
        if (second && !rc.c2) throw std::invalid_argument("rescale2 needs rescale.c2");
        const EnergyEstimate &e0 = constituent_estimate(base, cutoff);
        const EnergyEstimate &e1 = constituent_estimate({{}, rc.c1}, cutoff);
        const EnergyEstimate *e2 =
            second ? &constituent_estimate({{}, *rc.c2}, cutoff) : nullptr;
        if (cfg_.dump_series) record.series = series(base);
        return combine_rescaling(e0, e1, e2, rc,
                                 second ? RescaleOrder::second : RescaleOrder::first);
      }
      case Strategy::richardson: {
        std::vector<TimeSeries> parts = {series(base), series({{}, rc.c1})};
        if (rc.c2) parts.push_back(series({{}, *rc.c2}));
        TimeSeries combined = richardson_series(parts, rc);
        MitigatedEstimate m;
        m.strategy = "richardson";
        const EnergyEstimate &e = estimate("richardson", combined, cutoff);
        m.value = e.value;
        m.warnings = e.warnings;
        m.raw.emplace_back("richardson", e);
        if (cfg_.dump_series) record.series = std::move(combined);
        return m;
      }
    }
    throw std::logic_error("unhandled strategy");
  }

  SweepContext &ctx_;
  const ExperimentConfig &cfg_;
  std::uint64_t pair_index_;
  std::uint64_t gamma_index_;
  int a_, b_;
  double e_exact_;
  double gamma_;
  double kappa_;
  NoiseModel noise_;
  PairObservable obs_;
  std::map<std::string, TimeSeries> series_;
  std::map<std::pair<std::string, double>, EnergyEstimate> estimates_;
};

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::none: return "none";
    case Strategy::reshape: return "reshape";
    case Strategy::rescale1: return "rescale1";
    case Strategy::rescale2: return "rescale2";
    case Strategy::richardson: return "richardson";
  }
  return "none";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "none") return Strategy::none;
  if (text == "reshape") return Strategy::reshape;
  if (text == "rescale1") return Strategy::rescale1;
  if (text == "rescale2") return Strategy::rescale2;
  if (text == "richardson") return Strategy::richardson;
  throw std::invalid_argument("unknown strategy \"" + std::string(text) +
                              "\" (expected none, reshape, rescale1, rescale2 or richardson)");
}

double CutoffConfig::for_strategy(Strategy s) const {
  switch (s) {
    case Strategy::none: return none;
    case Strategy::reshape: return reshape;
    case Strategy::rescale1:
    case Strategy::rescale2: return rescale;
    case Strategy::richardson: return richardson;
  }
  return none;
}

void ExperimentConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  if (!(dt > 0.0)) throw ConfigError("dt: must be positive");
  if (length < 4) throw ConfigError("L: must be >= 4");
  if (!(beta == beta)) throw ConfigError("noise.beta: not a number");
  if (noise_kind == NoiseKind::custom)
    throw ConfigError("noise.kind: custom noise cannot be configured from a file");
  if (gammas.empty()) throw ConfigError("gamma_list: must not be empty");
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] >= 0.0) || !std::isfinite(gammas[i]))
      throw ConfigError("gamma_list[" + std::to_string(i) + "]: must be >= 0");
    if (i > 0 && !(gammas[i] > gammas[i - 1]))
      throw ConfigError("gamma_list: must be strictly ascending");
  }
  if (strategies.empty()) throw ConfigError("strategies: must not be empty");
  std::set<Strategy> seen;
  for (Strategy s : strategies)
    if (!seen.insert(s).second)
      throw ConfigError("strategies: duplicate entry \"" + to_string(s) + "\"");
  if (pairs.explicit_pairs.empty() && pairs.count == 0)
    throw ConfigError("pairs.count: must be >= 1");
  const int dim = 1 << model.n;
  for (std::size_t i = 0; i < pairs.explicit_pairs.size(); ++i) {
    const auto [a, b] = pairs.explicit_pairs[i];
    if (a < 0 || b < 0 || a >= dim || b >= dim || a == b)
      throw ConfigError("pairs.explicit[" + std::to_string(i) +
                        "]: indices must be distinct and below " + std::to_string(dim));
  }
  try {
    rescale.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(std::string("rescale: ") + e.what());
  }
  if (seen.count(Strategy::rescale2) && !rescale.c2)
    throw ConfigError("rescale.c2: required by strategy rescale2");
  if (reshape.variant == ReshapeSet::Variant::full_pauli_sample && reshape.count == 0)
    throw ConfigError("reshape.count: must be >= 1 for full-pauli-sample");
  if (reshape.variant == ReshapeSet::Variant::explicit_list) {
    if (reshape.strings.empty()) throw ConfigError("reshape.strings: must not be empty");
    for (std::size_t i = 0; i < reshape.strings.size(); ++i) {
      const std::string path = "reshape.strings[" + std::to_string(i) + "]";
      try {
        if (PauliString::parse(reshape.strings[i]).size() != model.n)
          throw ConfigError(path + ": length must equal model.n");
      } catch (const std::invalid_argument &e) {
        throw ConfigError(path + ": " + e.what());
      }
    }
  }
  for (auto [name, v] : {std::pair<const char *, double>{"none", cutoffs.none},
                         {"reshape", cutoffs.reshape},
                         {"rescale", cutoffs.rescale},
                         {"richardson", cutoffs.richardson}})
    if (!(v > 0.0 && v < 1.0))
      throw ConfigError(std::string("cutoffs.") + name + ": must lie in (0, 1)");
  if (min_gap && !(*min_gap >= 0.0)) throw ConfigError("min_gap: must be >= 0");
  if (threads == 0) throw ConfigError("threads: must be >= 1");
}

double ExperimentConfig::resolved_min_gap(const Spectrum &spectrum) const {
  return min_gap.value_or(1e-6 * spectrum.norm());
}

ExperimentConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end(), nullptr, true, true);
  } catch (const json::parse_error &e) {
    throw ConfigError(std::string("<document>: ") + e.what());
  }
  check_keys(root, "",
             {"model", "noise", "dt", "L", "pairs", "gamma_list", "strategies",
              "reshape", "rescale", "backend", "estimator", "cutoffs", "min_gap",
              "seed", "threads", "output_dir", "dump_series"});
  ExperimentConfig cfg;
  require(root, "", "model");
  cfg.model = parse_model(root.at("model"), "model");

  if (root.contains("noise")) {
    const json &n = root.at("noise");
    check_keys(n, "noise", {"kind", "beta"});
    if (n.contains("kind")) cfg.noise_kind = parse_enum(n, "noise", "kind", parse_noise_kind);
    if (n.contains("beta")) cfg.beta = get_number(n, "noise", "beta");
  }
  require(root, "", "dt");
  cfg.dt = parse_positive(root, "", "dt");
  require(root, "", "L");
  {
    const std::int64_t L = get_integer(root, "", "L");
    if (L < 4) fail("L", "must be >= 4");
    cfg.length = static_cast<std::size_t>(L);
  }
  if (root.contains("pairs")) {
    const json &p = root.at("pairs");
    check_keys(p, "pairs", {"count", "seed", "explicit"});
    if (p.contains("explicit") && p.contains("count"))
      fail("pairs", "give either count or explicit, not both");
    if (p.contains("count")) {
      const std::int64_t c = get_integer(p, "pairs", "count");
      if (c < 1) fail("pairs.count", "must be >= 1");
      cfg.pairs.count = static_cast<std::size_t>(c);
    }
    if (p.contains("seed")) cfg.pairs.seed = get_unsigned(p, "pairs", "seed");
    if (p.contains("explicit")) {
      const json &list = p.at("explicit");
      if (!list.is_array() || list.empty())
        fail("pairs.explicit", "expected a nonempty array of [a, b]");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const json &e = list[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
            !e[1].is_number_integer())
          fail("pairs.explicit[" + std::to_string(i) + "]", "expected [a, b]");
        cfg.pairs.explicit_pairs.emplace_back(e[0].get<int>(), e[1].get<int>());
      }
      cfg.pairs.count = cfg.pairs.explicit_pairs.size();
    }
  }
  if (root.contains("gamma_list")) {
    const json &g = root.at("gamma_list");
    if (!g.is_array()) fail("gamma_list", "expected an array of numbers");
    cfg.gammas.clear();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g[i].is_number()) fail("gamma_list[" + std::to_string(i) + "]", "expected a number");
      cfg.gammas.push_back(g[i].get<double>());
    }
  }
  if (root.contains("strategies")) {
    const json &s = root.at("strategies");
    if (!s.is_array()) fail("strategies", "expected an array of names");
    cfg.strategies.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string path = "strategies[" + std::to_string(i) + "]";
      if (!s[i].is_string()) fail(path, "expected a string");
      try {
        cfg.strategies.push_back(parse_strategy(s[i].get<std::string>()));
      } catch (const std::invalid_argument &e) {
        fail(path, e.what());
      }
    }
  }
  if (root.contains("reshape")) {
    const json &r = root.at("reshape");
    check_keys(r, "reshape", {"set", "count", "strings"});
    if (r.contains("set")) cfg.reshape.variant = parse_enum(r, "reshape", "set", parse_reshape_variant);
    if (r.contains("count")) {
      const std::int64_t c = get_integer(r, "reshape", "count");
      if (c < 1) fail("reshape.count", "must be >= 1");
      cfg.reshape.count = static_cast<std::size_t>(c);
    }
    if (r.contains("strings")) {
      const json &list = r.at("strings");
      if (!list.is_array()) fail("reshape.strings", "expected an array of strings");
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (!list[i].is_string())
          fail("reshape.strings[" + std::to_string(i) + "]", "expected a string");
        cfg.reshape.strings.push_back(list[i].get<std::string>());
      }
    }
  }
  if (root.contains("rescale")) {
    const json &r = root.at("rescale");
    check_keys(r, "rescale", {"c1", "c2"});
    if (r.contains("c1")) cfg.rescale.c1 = get_number(r, "rescale", "c1");
    if (r.contains("c2")) {
      if (r.at("c2").is_null())
        cfg.rescale.c2.reset();
      else
        cfg.rescale.c2 = get_number(r, "rescale", "c2");
    }
  }
  if (root.contains("backend")) cfg.backend = parse_enum(root, "", "backend", parse_backend);
  if (root.contains("estimator"))
    cfg.estimator = parse_enum(root, "", "estimator", parse_estimate_method);
  if (root.contains("cutoffs")) {
    const json &c = root.at("cutoffs");
    check_keys(c, "cutoffs", {"none", "reshape", "rescale", "richardson"});
    if (c.contains("none")) cfg.cutoffs.none = get_number(c, "cutoffs", "none");
    if (c.contains("reshape")) cfg.cutoffs.reshape = get_number(c, "cutoffs", "reshape");
    if (c.contains("rescale")) cfg.cutoffs.rescale = get_number(c, "cutoffs", "rescale");
    if (c.contains("richardson"))
      cfg.cutoffs.richardson = get_number(c, "cutoffs", "richardson");
  }
  if (root.contains("min_gap") && !root.at("min_gap").is_null())
    cfg.min_gap = get_number(root, "", "min_gap");
  if (root.contains("seed")) cfg.seed = get_unsigned(root, "", "seed");
  if (root.contains("threads")) {
    const std::int64_t t = get_integer(root, "", "threads");
    if (t < 1 || t > 1024) fail("threads", "must lie in [1, 1024]");
    cfg.threads = static_cast<unsigned>(t);
  }
  if (root.contains("output_dir")) cfg.output_dir = get_string(root, "", "output_dir");
  if (root.contains("dump_series")) cfg.dump_series = get_bool(root, "", "dump_series");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig &cfg) {
  json root;
  json model;
  model["variant"] = to_string(cfg.model.variant);
  model["n"] = cfg.model.n;
  if (cfg.model.variant == ModelVariant::ring) {
    model["nu_z"] = cfg.model.nu_z;
    model["nu_x"] = cfg.model.nu_x;
    model["J"] = cfg.model.J;
  } else {
    model["g"] = cfg.model.g;
  }
  root["model"] = model;
  root["noise"] = {{"kind", to_string(cfg.noise_kind)}, {"beta", cfg.beta}};
  root["dt"] = cfg.dt;
  root["L"] = cfg.length;
  json pairs;
  if (!cfg.pairs.explicit_pairs.empty()) {
    json list = json::array();
    for (const auto &[a, b] : cfg.pairs.explicit_pairs) list.push_back({a, b});
    pairs["explicit"] = list;
  } else {
    pairs["count"] = cfg.pairs.count;
  }
  if (cfg.pairs.seed) pairs["seed"] = *cfg.pairs.seed;
  root["pairs"] = pairs;
  root["gamma_list"] = cfg.gammas;
  json strategies = json::array();
  for (Strategy s : cfg.strategies) strategies.push_back(to_string(s));
  root["strategies"] = strategies;
  json reshape;
  reshape["set"] = to_string(cfg.reshape.variant);
  if (cfg.reshape.count) reshape["count"] = cfg.reshape.count;
  if (!cfg.reshape.strings.empty()) reshape["strings"] = cfg.reshape.strings;
  root["reshape"] = reshape;
  json rescale;
  rescale["c1"] = cfg.rescale.c1;
  rescale["c2"] = cfg.rescale.c2 ? json(*cfg.rescale.c2) : json(nullptr);
  root["rescale"] = rescale;
  root["backend"] = to_string(cfg.backend);
  root["estimator"] = to_string(cfg.estimator);
  root["cutoffs"] = {{"none", cfg.cutoffs.none},
                     {"reshape", cfg.cutoffs.reshape},
                     {"rescale", cfg.cutoffs.rescale},
                     {"richardson", cfg.cutoffs.richardson}};
  root["min_gap"] = cfg.min_gap ? json(*cfg.min_gap) : json(nullptr);
  root["seed"] = cfg.seed;
  root["threads"] = cfg.threads;
  root["output_dir"] = cfg.output_dir;
  root["dump_series"] = cfg.dump_series;
  return root.dump(2) + "\n";
}

std::vector<std::pair<int, int>> eligible_pairs(const Spectrum &spectrum,
                                                double min_gap) {
  const Eigen::VectorXd &E = spectrum.energies;
  const int d = static_cast<int>(spectrum.dim());
  // Sorted transition energies E_m - E_p over all ordered (p, m).
  std::vector<std::tuple<double, int, int>> transitions;
  transitions.reserve(static_cast<std::size_t>(d) * d);
  for (int p = 0; p < d; ++p)
    for (int m = 0; m < d; ++m) transitions.emplace_back(E(m) - E(p), p, m);
  std::sort(transitions.begin(), transitions.end());

  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const double e_ba = E(b) - E(a);
      if (std::abs(e_ba) < min_gap) continue;
      auto lo = std::lower_bound(transitions.begin(), transitions.end(),
                                 std::make_tuple(e_ba - min_gap, -1, -1));
      bool clash = false;
      for (auto it = lo; it != transitions.end() && std::get<0>(*it) < e_ba + min_gap; ++it) {
        if (std::abs(std::get<0>(*it) - e_ba) >= min_gap) continue;
        if (std::get<1>(*it) == a && std::get<2>(*it) == b) continue;
        clash = true;
        break;
      }
      if (!clash) out.emplace_back(a, b);
    }
  return out;
}

std::vector<std::pair<int, int>> sample_pairs(const Spectrum &spectrum,
                                              std::size_t count,
                                              std::uint64_t seed,
                                              double min_gap) {
  if (count == 0) throw std::invalid_argument("sample_pairs: count must be >= 1");
  std::vector<std::pair<int, int>> pool = eligible_pairs(spectrum, min_gap);
  if (pool.size() < count)
    throw std::invalid_argument(
        "sample_pairs: requested " + std::to_string(count) + " pairs but only " +
        std::to_string(pool.size()) + " are eligible at min_gap " +
        format_number(min_gap) + " (short by " + std::to_string(count - pool.size()) + ")");
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

SweepResult run_sweep(const ExperimentConfig &cfg) {
  cfg.validate();
  SweepContext ctx{cfg, build_hamiltonian(cfg.model), {}, {}, {}};
  ctx.spectrum = diagonalize(ctx.H);

  SweepResult result;
  SweepSummary &summary = result.summary;
  summary.min_gap = cfg.resolved_min_gap(ctx.spectrum);
  const auto eligible = eligible_pairs(ctx.spectrum, summary.min_gap);
  summary.eligible_pairs = eligible.size();
  if (SpectroscopyConfig{cfg.dt, cfg.length}.aliases(ctx.spectrum)) {
    std::ostringstream msg;
    msg << "dt * max|E_l - E_m| = "
        << cfg.dt * (ctx.spectrum.energies.maxCoeff() - ctx.spectrum.energies.minCoeff())
        << " >= pi: frequencies may alias";
    summary.warnings.push_back(msg.str());
  }
  if (!cfg.pairs.explicit_pairs.empty()) {
    ctx.pairs = cfg.pairs.explicit_pairs;
    for (const auto &p : ctx.pairs)
      if (std::find(eligible.begin(), eligible.end(), p) == eligible.end())
        summary.warnings.push_back("explicit pair (" + std::to_string(p.first) + ", " +
                                   std::to_string(p.second) +
                                   ") fails the min_gap degeneracy filter");
  } else {
    ctx.pairs = sample_pairs(ctx.spectrum, cfg.pairs.count, cfg.pair_seed(), summary.min_gap);
  }
  summary.pairs = ctx.pairs;

  const std::size_t n_tasks = ctx.pairs.size() * cfg.gammas.size();
  std::vector<std::vector<RunRecord>> slots(n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      const std::size_t p = t / cfg.gammas.size();
      const std::size_t g = t % cfg.gammas.size();
      TaskRunner runner(ctx, p, g);
      slots[t] = runner.run();
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(cfg.threads, std::max<std::size_t>(n_tasks, 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto &th : pool) th.join();
  }

  for (auto &slot : slots)
    for (auto &r : slot) {
      if (r.failed) ++summary.failures;
      if (!r.message.empty()) summary.run_messages[r.run_id] = r.message;
      result.records.push_back(std::move(r));
    }
  summary.strategies = summarize(result.records);
  return result;
}

double fit_loglog_slope(const std::vector<double> &gammas,
                        const std::vector<double> &errors) {
  if (gammas.size() != errors.size())
    throw std::invalid_argument("fit_loglog_slope: size mismatch");
  if (gammas.size() < 3)
    throw std::invalid_argument("fit_loglog_slope: need at least 3 points");
  const std::size_t n = gammas.size();
  double sx = 0.0, sy = 0.0;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(gammas[i] > 0.0) || !(errors[i] > 0.0))
      throw std::invalid_argument("fit_loglog_slope: values must be positive");
    x[i] = std::log(gammas[i]);
    y[i] = std::log(errors[i]);
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog_slope: gammas must differ");
  return sxy / sxx;
}

std::map<std::string, StrategySummary> summarize(const std::vector<RunRecord> &records) {
  std::map<std::string, std::map<double, std::vector<const RunRecord *>>> grouped;
  for (const auto &r : records)
    if (!r.failed) grouped[r.strategy][r.gamma].push_back(&r);
  std::map<std::string, StrategySummary> out;
  for (const auto &[strategy, by_gamma] : grouped) {
    StrategySummary s;
    for (const auto &[gamma, runs] : by_gamma) {
      double rel = 0.0, abs = 0.0;
      for (const RunRecord *r : runs) {
        rel += r->rel_error;
        abs += r->abs_error;
      }
      s.gammas.push_back(gamma);
      s.mean_rel_error.push_back(rel / runs.size());
      s.mean_abs_error.push_back(abs / runs.size());
      s.runs.push_back(runs.size());
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < s.gammas.size(); ++i)
      if (s.gammas[i] > 0.0 && s.mean_rel_error[i] > 0.0) {
        xs.push_back(s.gammas[i]);
        ys.push_back(s.mean_rel_error[i]);
      }
    if (xs.size() >= 3) s.slope = fit_loglog_slope(xs, ys);
    out.emplace(strategy, std::move(s));
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string runs_csv(const std::vector<RunRecord> &records) {
  std::string out(kRunsHeader);
  out += '\n';
  for (const auto &r : records) {
    out += r.run_id + ',' + r.model + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.a) + ',' + std::to_string(r.b) + ',' +
           format_number(r.e_exact) + ',' + format_number(r.gamma) + ',' +
           format_number(r.kappa) + ',' + r.strategy + ',' + r.variant + ',' +
           format_number(r.estimate) + ',' + format_number(r.abs_error) + ',' +
           format_number(r.rel_error) + ',' + format_number(r.decay) + ',' +
           std::to_string(r.n_modes) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::string summary_json(const SweepSummary &summary, const ExperimentConfig &cfg) {
  json root;
  json meta;
  meta["aggregate"] = "arithmetic mean over pairs";
  meta["relative_error"] = "|estimate - E_exact| / |E_exact|";
  meta["slope_fit"] = "least squares of log(mean_rel_error) on log(gamma), gamma > 0";
  meta["min_gap"] = summary.min_gap;
  meta["pair_filter"] =
      "a < b, |E_ba| >= min_gap, no spectator |E_ba - E_mp| < min_gap";
  meta["eligible_pairs"] = summary.eligible_pairs;
  json pairs = json::array();
  for (const auto &[a, b] : summary.pairs) pairs.push_back({a, b});
  meta["pairs"] = pairs;
  meta["failures"] = summary.failures;
  meta["warnings"] = summary.warnings;
  meta["run_messages"] = summary.run_messages;
  meta["config"] = json::parse(serialize_config(cfg));
  root["metadata"] = meta;
  json strategies;
  for (const auto &[name, s] : summary.strategies) {
    json entry;
    entry["gamma"] = s.gammas;
    json rel = json::array(), abs = json::array();
    for (double v : s.mean_rel_error) rel.push_back(number_or_null(v));
    for (double v : s.mean_abs_error) abs.push_back(number_or_null(v));
    entry["mean_rel_error"] = rel;
    entry["mean_abs_error"] = abs;
    entry["runs"] = s.runs;
    entry["slope"] = s.slope ? number_or_null(*s.slope) : json(nullptr);
    strategies[name] = entry;
  }
  root["strategies"] = strategies.is_null() ? json::object() : strategies;
  return root.dump(2) + "\n";
}

std::string series_csv(const TimeSeries &series) {
  std::string out = "k,t,re,im\n";
  for (std::size_t k = 0; k < series.size(); ++k)
    out += std::to_string(k) + ',' + format_number(series.dt * static_cast<double>(k)) +
           ',' + format_number(series.samples[k].real()) + ',' +
           format_number(series.samples[k].imag()) + '\n';
  return out;
}

void write_outputs(const SweepResult &result, const ExperimentConfig &cfg,
                   const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir.string() + ": " + ec.message());
  auto write = [](const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error(path.string() + ": write failed");
  };
  write(dir / "runs.csv", runs_csv(result.records));
  write(dir / "summary.json", summary_json(result.summary, cfg));
  if (cfg.dump_series)
    for (const auto &r : result.records)
      if (r.series.size() > 0) write(dir / ("series_" + r.run_id + ".csv"), series_csv(r.series));
}

}  // namespace aqem
