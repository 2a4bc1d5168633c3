#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "onoff/distributions.hpp"
#include "onoff/errors.hpp"
#include "onoff/queue.hpp"

namespace onoff {

enum class Experiment { params, simulate, lemma1, theorem1, theorem2, collapse, variance_curve, hurst };

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::params: return "params";
    case Experiment::simulate: return "simulate";
    case Experiment::lemma1: return "lemma1";
    case Experiment::theorem1: return "theorem1";
    case Experiment::theorem2: return "theorem2";
    case Experiment::collapse: return "collapse";
    case Experiment::variance_curve: return "variance-curve";
    case Experiment::hurst: return "hurst";
  }
  return "?";
}

inline Experiment parse_experiment(const std::string& name) {
  for (auto e : {Experiment::params, Experiment::simulate, Experiment::lemma1, Experiment::theorem1,
                 Experiment::theorem2, Experiment::collapse, Experiment::variance_curve,
                 Experiment::hurst}) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

/// Everything an experiment run needs. Unset optional fields fall back to
/// per-experiment defaults (see defaults_for).
struct ExperimentConfig {
  Experiment experiment = Experiment::params;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  unsigned workers = 1;

  // model
  std::optional<std::size_t> sources;  // N; pinned N for R-ladders
  double lambda = 1.0;
  double theta = 1.0;
  PeriodDistribution on = PeriodDistribution::exponential(1.0);
  PeriodDistribution off = PeriodDistribution::exponential(1.0);
  ServiceDistribution service = ServiceDistribution::deterministic();
  Regime regime = Regime::n_scaling;
  double time_scale = 1.0;  // R for single R-scaling runs
  double horizon = 10.0;
  double grid_step = 1.0;

  // ladders and sampling
  std::vector<std::size_t> n_ladder;
  std::vector<double> r_ladder;
  std::size_t replications = 200;
  std::size_t limit_replications = 2000;
  std::vector<double> times;
  double limit_step = 0.0025;
  double epsilon = 0.5;
  double kappa = 1.0;

  // hurst
  std::size_t series_length = 4096;
  double bin = 1.0;
  int min_exp = 0;
  int max_exp = -1;
  std::vector<double> fgn_hurst;
  double hurst_tolerance = 0.05;
  double hurst_low = 0.65;
  double hurst_high = 0.85;

  // variance-curve
  double relative_tolerance = 0.05;
  double slope_tolerance = 0.10;

  // exports
  bool export_arrivals = false;
  std::size_t export_paths = 0;

  QueueConfig queue_config(std::size_t n) const {
    QueueConfig q;
    q.sources = n;
    q.lambda = lambda;
    q.theta = theta;
    q.on = on;
    q.off = off;
    q.service = service;
    q.regime = regime;
    q.time_scale = time_scale;
    q.horizon = horizon;
    return q;
  }

  void validate() const;
};

/// Per-experiment defaults, sized for a desk run.
inline ExperimentConfig defaults_for(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::params: break;
    case Experiment::simulate:
      c.sources = 100;
      c.replications = 1;
      c.horizon = 100.0;
      c.grid_step = 1.0;
      break;
    case Experiment::lemma1:
      c.sources = 3;
      c.replications = 10000;
      c.times = {2.0, 5.0, 10.0};
      break;
    case Experiment::theorem1:
      c.n_ladder = {10, 100, 1000};
      c.replications = 500;
      c.times = {2.0, 5.0};
      c.grid_step = 1.0;
      break;
    case Experiment::theorem2:
      c.on = PeriodDistribution::pareto(1.5, 1.0);
      c.r_ladder = {10.0, 30.0, 100.0};
      c.replications = 300;
      c.limit_replications = 3000;
      c.times = {1.0};
      c.grid_step = 0.25;
      c.limit_step = 1.0 / 4096.0;
      break;
    case Experiment::collapse:
      c.n_ladder = {10, 100, 1000};
      c.service = ServiceDistribution::exponential();
      c.horizon = 5.0;
      c.grid_step = 0.01;
      break;
    case Experiment::variance_curve:
      c.sources = 1000;
      c.replications = 1000;
      c.times = {5.0, 10.0, 20.0};
      break;
    case Experiment::hurst:
      c.sources = 50;
      c.on = PeriodDistribution::pareto(1.5, 1.0);
      c.off = PeriodDistribution::pareto(1.5, 1.0);
      c.replications = 32;
      c.fgn_hurst = {0.55, 0.65, 0.75, 0.85};
      break;
  }
  return c;
}

inline void ExperimentConfig::validate() const {
  if (!seed && experiment != Experiment::params) {
    throw ConfigError("seed", "a root seed is required (no wall-clock seeding)");
  }
  if (replications < 1) throw ConfigError("replications", "must be >= 1");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  if (!(lambda > 0.0)) throw ConfigError("lambda", "must be positive");
  if (!(theta > 0.0)) throw ConfigError("theta", "must be positive");
  if (!(horizon > 0.0)) throw ConfigError("horizon", "must be positive");
  if (!(grid_step > 0.0)) throw ConfigError("grid_step", "must be positive");
  if (!(limit_step > 0.0)) throw ConfigError("limit_step", "must be positive");
  if (sources && *sources < 1) throw ConfigError("N", "must be >= 1");
  for (std::size_t i = 1; i < n_ladder.size(); ++i) {
    if (!(n_ladder[i] > n_ladder[i - 1])) throw ConfigError("N_ladder", "must be strictly increasing");
  }
  for (std::size_t i = 1; i < r_ladder.size(); ++i) {
    if (!(r_ladder[i] > r_ladder[i - 1])) throw ConfigError("R_ladder", "must be strictly increasing");
  }
  for (double r : r_ladder) {
    if (!(r >= 1.0)) throw ConfigError("R_ladder", "time scales must be >= 1");
  }
  if (!n_ladder.empty() && n_ladder.front() < 1) throw ConfigError("N_ladder", "entries must be >= 1");
  for (double t : times) {
    if (!(t > 0.0)) throw ConfigError("times", "sample times must be positive");
  }
  if (!std::is_sorted(times.begin(), times.end())) throw ConfigError("times", "must be sorted");
  if (regime == Regime::r_scaling && !(time_scale >= 1.0)) throw ConfigError("R", "must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("fast_growth.epsilon", "must be positive");
  if (!(kappa > 0.0)) throw ConfigError("fast_growth.kappa", "must be positive");
  for (double h : fgn_hurst) {
    if (!(h > 0.0 && h < 1.0)) throw ConfigError("fgn_hurst", "entries must lie in (0, 1)");
  }
  if (!(bin > 0.0)) throw ConfigError("bin", "must be positive");
}

namespace detail {

inline double json_number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "expected a number");
  return j.get<double>();
}

inline std::size_t json_count(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_integer() && !(j.is_number() && j.get<double>() == std::floor(j.get<double>()))) {
    throw ConfigError(key, "expected a non-negative integer");
  }
  const double v = j.get<double>();
  if (v < 0) throw ConfigError(key, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed,
                           const std::string& prefix) {
  for (const auto& [k, _] : obj.items()) {
    if (!allowed.count(k)) throw ConfigError(prefix + k, "unknown key");
  }
}

inline double member(const nlohmann::json& obj, const char* name, const std::string& prefix) {
  if (!obj.contains(name)) throw ConfigError(prefix + name, "missing");
  return json_number(obj.at(name), prefix + name);
}

inline PeriodDistribution parse_period(const nlohmann::json& j, const std::string& key) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError(key + ".kind", "expected an object with a string 'kind'");
  }
  const auto kind = j.at("kind").get<std::string>();
  const std::string p = key + ".";
  try {
    if (kind == "pareto") {
      reject_unknown(j, {"kind", "alpha", "mean"}, p);
      return PeriodDistribution::pareto(member(j, "alpha", p), member(j, "mean", p));
    }
    if (kind == "exponential") {
      reject_unknown(j, {"kind", "mean"}, p);
      return PeriodDistribution::exponential(member(j, "mean", p));
    }
    if (kind == "uniform") {
      reject_unknown(j, {"kind", "low", "high"}, p);
      return PeriodDistribution::uniform(member(j, "low", p), member(j, "high", p));
    }
    if (kind == "deterministic") {
      reject_unknown(j, {"kind", "value"}, p);
      return PeriodDistribution::deterministic(member(j, "value", p));
    }
  } catch (const ConfigError& e) {
    if (e.key().rfind(p, 0) == 0) throw;
    throw ConfigError(p + e.key(), e.message());
  }
  throw ConfigError(key + ".kind", "unknown period kind '" + kind + "'");
}

inline ServiceDistribution parse_service(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("service.kind", "expected an object with a string 'kind'");
  }
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "deterministic") {
    reject_unknown(j, {"kind"}, "service.");
    return ServiceDistribution::deterministic();
  }
  if (kind == "exponential") {
    reject_unknown(j, {"kind"}, "service.");
    return ServiceDistribution::exponential();
  }
  if (kind == "two-point") {
    reject_unknown(j, {"kind", "low", "high"}, "service.");
    return ServiceDistribution::two_point(member(j, "low", "service."), member(j, "high", "service."));
  }
  throw ConfigError("service.kind", "unknown service kind '" + kind + "'");
}

template <typename T, typename F>
std::vector<T> parse_list(const nlohmann::json& j, const std::string& key, F&& item) {
  if (!j.is_array()) throw ConfigError(key, "expected an array");
  std::vector<T> out;
  for (const auto& v : j) out.push_back(item(v, key));
  return out;
}

}  // namespace detail

/// Apply the keys of a JSON object on top of `base`. Unknown keys and type
/// mismatches raise ConfigError naming the key.
inline ExperimentConfig apply_json(ExperimentConfig cfg, const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
  reject_unknown(j,
                 {"experiment", "seed", "out", "workers", "N", "lambda", "theta", "on", "off",
                  "service", "regime", "R", "horizon", "grid_step", "N_ladder", "R_ladder",
                  "replications", "limit_replications", "times", "limit_step", "fast_growth",
                  "series_length", "bin", "block_exponents", "fgn_hurst", "hurst_tolerance",
                  "hurst_band", "relative_tolerance", "slope_tolerance", "export_arrivals",
                  "export_paths"},
                 "");
  for (const auto& [key, v] : j.items()) {
    if (key == "experiment") {
      if (!v.is_string()) throw ConfigError(key, "expected a string");
    } else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError(key, "expected a non-negative integer");
      }
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "out") {
      if (!v.is_string()) throw ConfigError(key, "expected a string");
      cfg.out = v.get<std::string>();
    } else if (key == "workers") {
      cfg.workers = static_cast<unsigned>(json_count(v, key));
    } else if (key == "N") {
      cfg.sources = json_count(v, key);
    } else if (key == "lambda") {
      cfg.lambda = json_number(v, key);
    } else if (key == "theta") {
      cfg.theta = json_number(v, key);
    } else if (key == "on") {
      cfg.on = parse_period(v, key);
    } else if (key == "off") {
      cfg.off = parse_period(v, key);
    } else if (key == "service") {
      cfg.service = parse_service(v);
    } else if (key == "regime") {
      if (!v.is_string()) throw ConfigError(key, "expected a string");
      const auto r = v.get<std::string>();
      if (r == "N-scaling") cfg.regime = Regime::n_scaling;
      else if (r == "R-scaling") cfg.regime = Regime::r_scaling;
      else throw ConfigError(key, "expected 'N-scaling' or 'R-scaling'");
    } else if (key == "R") {
      cfg.time_scale = json_number(v, key);
    } else if (key == "horizon") {
      cfg.horizon = json_number(v, key);
    } else if (key == "grid_step") {
      cfg.grid_step = json_number(v, key);
    } else if (key == "N_ladder") {
      cfg.n_ladder = parse_list<std::size_t>(v, key, json_count);
    } else if (key == "R_ladder") {
      cfg.r_ladder = parse_list<double>(v, key, json_number);
    } else if (key == "replications") {
      cfg.replications = json_count(v, key);
    } else if (key == "limit_replications") {
      cfg.limit_replications = json_count(v, key);
    } else if (key == "times") {
      cfg.times = parse_list<double>(v, key, json_number);
    } else if (key == "limit_step") {
      cfg.limit_step = json_number(v, key);
    } else if (key == "fast_growth") {
      if (!v.is_object()) throw ConfigError(key, "expected an object");
      reject_unknown(v, {"epsilon", "kappa"}, "fast_growth.");
      if (v.contains("epsilon")) cfg.epsilon = json_number(v.at("epsilon"), "fast_growth.epsilon");
      if (v.contains("kappa")) cfg.kappa = json_number(v.at("kappa"), "fast_growth.kappa");
    } else if (key == "series_length") {
      cfg.series_length = json_count(v, key);
    } else if (key == "bin") {
      cfg.bin = json_number(v, key);
    } else if (key == "block_exponents") {
      const auto e = parse_list<std::size_t>(v, key, json_count);
      if (e.size() != 2) throw ConfigError(key, "expected [min, max]");
      cfg.min_exp = static_cast<int>(e[0]);
      cfg.max_exp = static_cast<int>(e[1]);
    } else if (key == "fgn_hurst") {
      cfg.fgn_hurst = parse_list<double>(v, key, json_number);
    } else if (key == "hurst_tolerance") {
      cfg.hurst_tolerance = json_number(v, key);
    } else if (key == "hurst_band") {
      const auto b = parse_list<double>(v, key, json_number);
      if (b.size() != 2 || !(b[0] < b[1])) throw ConfigError(key, "expected [low, high]");
      cfg.hurst_low = b[0];
      cfg.hurst_high = b[1];
    } else if (key == "relative_tolerance") {
      cfg.relative_tolerance = json_number(v, key);
    } else if (key == "slope_tolerance") {
      cfg.slope_tolerance = json_number(v, key);
    } else if (key == "export_arrivals") {
      if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
      cfg.export_arrivals = v.get<bool>();
    } else if (key == "export_paths") {
      cfg.export_paths = json_count(v, key);
    }
  }
  return cfg;
}

/// Build a config for `experiment` from JSON text: defaults first, then the
/// file's keys. An "experiment" key in the file must agree with the
/// requested experiment.
inline ExperimentConfig parse_config(Experiment experiment, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("experiment") && j.at("experiment").is_string() &&
      parse_experiment(j.at("experiment").get<std::string>()) != experiment) {
    throw ConfigError("experiment", "file is for '" + j.at("experiment").get<std::string>() +
                                        "' but '" + to_string(experiment) + "' was requested");
  }
  return apply_json(defaults_for(experiment), j);
}

inline ExperimentConfig load_config(Experiment experiment, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(experiment, ss.str());
}

}  // namespace onoff
