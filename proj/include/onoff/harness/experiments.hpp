#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "onoff/distributions.hpp"
#include "onoff/errors.hpp"
#include "onoff/gaussian.hpp"
#include "onoff/grid.hpp"
#include "onoff/harness/config.hpp"
#include "onoff/harness/csv.hpp"
#include "onoff/harness/parallel.hpp"
#include "onoff/limits.hpp"
#include "onoff/queue.hpp"
#include "onoff/random.hpp"
#include "onoff/sources.hpp"
#include "onoff/stats.hpp"

namespace onoff {

/// Outcome of one experiment: PASS verdict, human summary, and the CSV/text
/// artifacts keyed by file name (written by run()).
struct ExperimentResult {
  bool pass = true;
  std::string summary;
  std::vector<std::pair<std::string, std::string>> files;

  const std::string* file(const std::string& name) const {
    for (const auto& [n, content] : files) {
      if (n == name) return &content;
    }
    return nullptr;
  }
};

namespace detail {

inline std::vector<BinarySourcePath> simulate_sources(const PeriodDistribution& on,
                                                      const PeriodDistribution& off, std::size_t n,
                                                      double horizon, RandomStream& rng) {
  std::vector<BinarySourcePath> paths;
  paths.reserve(n);
  for (std::size_t i = 0; i < n; ++i) paths.push_back(simulate_source(on, off, horizon, rng));
  return paths;
}

/// Streams for the per-source Poisson clocks of one replication.
inline std::vector<RandomStream> source_streams(std::uint64_t seed, const std::string& experiment,
                                                std::uint64_t level, std::size_t rep,
                                                const char* component, std::size_t n) {
  std::vector<RandomStream> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(derive_stream(seed, {experiment, level, rep, component, i}));
  return out;
}

/// One queue replication from N stationary sources with direct arrivals.
struct QueueReplication {
  QueueTrace trace;
  ArrivalStream arrivals;
};

inline QueueReplication simulate_queue_replication(const ExperimentConfig& cfg, std::size_t n,
                                                   double mu, double horizon, const TimeGrid& grid,
                                                   const std::string& label, std::uint64_t level,
                                                   std::size_t rep) {
  const std::uint64_t seed = *cfg.seed;
  auto src_rng = derive_stream(seed, {label, level, rep, "sources"});
  const auto paths = simulate_sources(cfg.on, cfg.off, n, horizon, src_rng);
  auto streams = source_streams(seed, label, level, rep, "arrivals", n);
  auto arrivals = arrivals_direct(paths, cfg.lambda, streams);
  auto svc_rng = derive_stream(seed, {label, level, rep, "service"});
  auto trace = simulate_queue(arrivals, cfg.service, mu, grid, svc_rng);
  return {std::move(trace), std::move(arrivals)};
}

inline std::size_t stride_between(const TimeGrid& fine, const TimeGrid& coarse, const char* key) {
  const double ratio = coarse.step / fine.step;
  const auto stride = static_cast<std::size_t>(std::llround(ratio));
  if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio) {
    throw ConfigError(key, "must divide grid_step");
  }
  return stride;
}

inline SampledPath subsample(const SampledPath& fine, const TimeGrid& coarse, std::size_t stride) {
  SampledPath out(coarse);
  for (std::size_t k = 0; k < coarse.points; ++k) out.values[k] = fine.values[k * stride];
  return out;
}

inline void require_times_on_grid(const std::vector<double>& times, const TimeGrid& grid) {
  if (times.empty()) throw ConfigError("times", "at least one sample time is required");
  for (double t : times) {
    try {
      (void)grid.index_of(t);
    } catch (const std::out_of_range&) {
      throw ConfigError("times", "sample time " + format_number(t) + " is not a multiple of grid_step");
    }
  }
}

inline TimeGrid checked_grid(double horizon, double step, const char* key) {
  try {
    return TimeGrid::covering(horizon, step);
  } catch (const std::invalid_argument&) {
    throw ConfigError(key, "must divide the horizon " + format_number(horizon));
  }
}

inline std::string params_block(const LimitParams& p) {
  std::ostringstream os;
  auto kv = [&](const char* k, double v) { os << k << '=' << format_number(v) << '\n'; };
  kv("gamma", p.gamma);
  kv("alpha_on", p.alpha_on);
  kv("alpha_off", p.alpha_off);
  kv("a_on", p.a_on);
  kv("a_off", p.a_off);
  os << "b=" << (std::isinf(p.b) ? std::string("inf") : format_number(p.b)) << '\n';
  kv("alpha_min", p.alpha_min);
  os << "branch=" << (p.two_term() ? "two-term" : "single-term") << '\n';
  os << "min_index=" << p.min_index << '\n';
  os << "max_index=" << p.max_index << '\n';
  kv("pi2", p.pi2);
  kv("H", p.hurst);
  kv("L_constant", p.c);
  os << "tail_reference=" << (p.tail_index_ref == 1 ? "on" : "off") << '\n';
  return os.str();
}

inline std::string params_table(const LimitParams& p) {
  std::ostringstream os;
  auto row = [&](const char* name, const std::string& v) {
    os << "  " << name;
    for (std::size_t i = std::string(name).size(); i < 28; ++i) os << ' ';
    os << v << '\n';
  };
  row("gamma (P(ON))", format_number(p.gamma));
  row("alpha_1 / alpha_2", format_number(p.alpha_on) + " / " + format_number(p.alpha_off));
  row("a_1 / a_2", format_number(p.a_on) + " / " + format_number(p.a_off));
  row("b", std::isinf(p.b) ? "inf" : format_number(p.b));
  row("alpha_min", format_number(p.alpha_min));
  row("pi^2", format_number(p.pi2));
  row("H", format_number(p.hurst));
  row("L (constant)", format_number(p.c));
  row("F_L", p.tail_index_ref == 1 ? "ON tail" : "OFF tail");
  return os.str();
}

/// Covariance of T~ matching the period laws: closed form for exponential
/// periods, the power law for infinite variance, and an estimated
/// autocovariance otherwise.
inline TtildeCovariance ttilde_covariance_for(const ExperimentConfig& cfg, const LimitParams& params,
                                              double horizon) {
  using K = PeriodDistribution::Kind;
  if (cfg.on.kind() == K::exponential && cfg.off.kind() == K::exponential) {
    return TtildeCovariance::markov_exact(cfg.on.mean(), cfg.off.mean());
  }
  if (params.long_range_dependent()) return TtildeCovariance::asymptotic_heavy(params);
  const double step = std::min(cfg.on.mean(), cfg.off.mean()) / 20.0;
  const auto lags = static_cast<std::size_t>(std::ceil(horizon / step)) + 1;
  auto rng = derive_stream(*cfg.seed, {to_string(cfg.experiment), "eta"});
  auto eta = estimate_on_autocovariance(cfg.on, cfg.off, step, lags, 200,
                                        std::max(20.0 * horizon, 50.0 * (cfg.on.mean() + cfg.off.mean())), rng);
  return TtildeCovariance::tabulated(std::move(eta), step);
}

inline void write_report_rows(CsvTable& table, const std::string& experiment,
                              const ConvergenceReport& rep) {
  for (const auto& r : rep.rows) {
    table.row(experiment, r.sources, r.t, r.ks.statistic, r.ks.critical, !r.ks.reject());
  }
}

inline std::string verdict_lines(const ConvergenceReport& rep, bool require_bound) {
  std::ostringstream os;
  for (const auto& v : rep.verdicts) {
    os << "  t=" << format_number(v.t) << ": KS first rung " << format_number(v.first_statistic)
       << ", last rung " << format_number(v.last_statistic) << " (2 x critical "
       << format_number(2.0 * v.last_critical) << "); decreased=" << (v.decreased ? "yes" : "no")
       << ", strictly monotone=" << (v.strictly_monotone ? "yes" : "no");
    if (require_bound) os << ", within bound=" << (v.within_bound ? "yes" : "no");
    os << " -> " << (v.pass ? "PASS" : "FAIL") << '\n';
  }
  return os.str();
}

inline void append_paths(CsvTable& table, const SampledPath& p, std::size_t rep, const char* name) {
  for (std::size_t k = 0; k < p.size(); ++k) table.row(p.grid.time(k), p.values[k], rep, name);
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline ExperimentResult run_params(const ExperimentConfig& cfg) {
  const auto p = limit_params(cfg.on, cfg.off);
  ExperimentResult res;
  std::ostringstream os;
  os << "Limit parameters for ON " << cfg.on.describe() << ", OFF " << cfg.off.describe() << "\n\n"
     << detail::params_table(p) << '\n'
     << "(b is the limit of x^(alpha_2 - alpha_1) L_1(x) / L_2(x) as x -> inf)\n\n"
     << detail::params_block(p);
  if (p.long_range_dependent() && !cfg.r_ladder.empty()) {
    CsvTable ladder("R,N,growth_value,d_R,U,V");
    for (double r : cfg.r_ladder) {
      const auto fg = choose_N_fast_growth(r, p, cfg.epsilon, cfg.kappa);
      const std::size_t n = cfg.sources.value_or(fg.sources);
      const auto uv = uv_diagnostic(r, p);
      ladder.row(r, n, fg.growth_value, normalizer_dR(static_cast<double>(n), r, p), uv.u, uv.v);
    }
    os << "\nR-ladder (fast growth eps=" << format_number(cfg.epsilon) << ", kappa="
       << format_number(cfg.kappa) << "):\n" << ladder.str();
    res.files.emplace_back("ladder.csv", ladder.str());
  }
  res.summary = os.str();
  res.files.emplace_back("params.txt", detail::params_block(p));
  return res;
}

inline ExperimentResult run_simulate(const ExperimentConfig& cfg) {
  const std::size_t n = cfg.sources.value_or(100);
  const auto qc = cfg.queue_config(n);
  qc.validate();
  const auto grid = detail::checked_grid(cfg.horizon, cfg.grid_step, "grid_step");
  double mu = 0.0;
  if (cfg.regime == Regime::n_scaling) {
    mu = service_rate_N(qc);
  } else {
    mu = service_rate_R(qc, limit_params(cfg.on, cfg.off));
  }
  std::vector<detail::QueueReplication> runs(cfg.replications);
  parallel_for(cfg.replications, cfg.workers, [&](std::size_t rep) {
    runs[rep] = detail::simulate_queue_replication(cfg, n, mu, cfg.horizon, grid, "simulate", n, rep);
  });

  ExperimentResult res;
  std::ostringstream os;
  os << "Queue simulation: N=" << n << ", mu=" << format_number(mu) << ", horizon "
     << format_number(cfg.horizon) << ", " << cfg.replications << " replication(s)\n";
  CsvTable totals("replication,arrivals,departures,final_Q,final_B,final_L,conservation");
  for (std::size_t rep = 0; rep < runs.size(); ++rep) {
    const auto& tr = runs[rep].trace;
    CsvTable t("t,Q,L,B");
    for (std::size_t k = 0; k < grid.points; ++k) {
      t.row(grid.time(k), tr.queue_length[k], tr.workload[k], tr.busy_time[k]);
    }
    res.files.emplace_back("trace_" + std::to_string(rep) + ".csv", t.str());
    if (cfg.export_arrivals) {
      CsvTable a("source_id,epoch");
      const auto& arr = runs[rep].arrivals;
      for (std::size_t i = 0; i < arr.epochs.size(); ++i) a.row(arr.source_ids[i], arr.epochs[i]);
      res.files.emplace_back("arrivals_" + std::to_string(rep) + ".csv", a.str());
    }
    const bool conserved = tr.arrivals - tr.departures == tr.queue_length.back();
    res.pass = res.pass && conserved;
    totals.row(rep, tr.arrivals, tr.departures, tr.queue_length.back(), tr.busy_time.back(),
               tr.workload.back(), conserved);
  }
  os << totals.str();
  res.files.emplace_back("totals.csv", totals.str());
  res.summary = os.str();
  return res;
}

/// Lemma 1: direct per-source arrivals and the single Poisson stream run on
/// the aggregate ON-time clock give A^N(t) the same law.
inline ExperimentResult run_lemma1(const ExperimentConfig& cfg) {
  const std::size_t n = cfg.sources.value_or(3);
  if (cfg.times.empty()) throw ConfigError("times", "at least one sample time is required");
  const double horizon = cfg.times.back();
  const std::size_t k = cfg.times.size();
  std::vector<double> direct(cfg.replications * k), modulated(cfg.replications * k);
  const std::uint64_t seed = *cfg.seed;

  parallel_for(cfg.replications, cfg.workers, [&](std::size_t rep) {
    auto rng_d = derive_stream(seed, {"lemma1", n, rep, "direct-sources"});
    const auto paths_d = detail::simulate_sources(cfg.on, cfg.off, n, horizon, rng_d);
    auto streams = detail::source_streams(seed, "lemma1", n, rep, "direct-arrivals", n);
    const auto a_d = arrivals_direct(paths_d, cfg.lambda, streams);

    auto rng_m = derive_stream(seed, {"lemma1", n, rep, "modulated-sources"});
    const auto paths_m = detail::simulate_sources(cfg.on, cfg.off, n, horizon, rng_m);
    auto rng_a = derive_stream(seed, {"lemma1", n, rep, "modulated-arrivals"});
    const auto a_m = arrivals_modulated(superpose(paths_m), cfg.lambda, rng_a);

    for (std::size_t i = 0; i < k; ++i) {
      direct[rep * k + i] = static_cast<double>(a_d.count(cfg.times[i]));
      modulated[rep * k + i] = static_cast<double>(a_m.count(cfg.times[i]));
    }
  });

  ExperimentResult res;
  CsvTable report("experiment,N,t,statistic,critical,pass");
  std::ostringstream os;
  os << "Lemma 1 (equality in law of the two arrival constructions): N=" << n << ", lambda="
     << format_number(cfg.lambda) << ", " << cfg.replications << " replications per construction\n";
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> a(cfg.replications), b(cfg.replications);
    for (std::size_t r = 0; r < cfg.replications; ++r) {
      a[r] = direct[r * k + i];
      b[r] = modulated[r * k + i];
    }
    const auto ks = ks_two_sample(a, b);
    const bool ok = !ks.reject();
    res.pass = res.pass && ok;
    report.row("lemma1", n, cfg.times[i], ks.statistic, ks.critical, ok);
    os << "  t=" << format_number(cfg.times[i]) << ": mean direct "
       << format_number(std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size()))
       << ", mean modulated "
       << format_number(std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size()))
       << ", KS " << format_number(ks.statistic) << " vs critical " << format_number(ks.critical)
       << " -> " << (ok ? "PASS" : "FAIL") << '\n';
  }
  res.summary = os.str();
  res.files.emplace_back("report.csv", report.str());
  return res;
}

/// Theorem 1: Q~^N(t) approaches the reflected Gaussian limit along an N-ladder.
inline ExperimentResult run_theorem1(const ExperimentConfig& cfg) {
  if (!cfg.on.regular_near_zero() || !cfg.off.regular_near_zero()) {
    throw RegimeError("theorem1 needs period laws with a density bounded near 0 (no deterministic periods)");
  }
  if (cfg.n_ladder.empty()) throw ConfigError("N_ladder", "theorem1 needs an N-ladder");
  const auto params = limit_params(cfg.on, cfg.off);
  const double horizon = cfg.times.back();
  const auto sample_grid = detail::checked_grid(horizon, cfg.grid_step, "grid_step");
  detail::require_times_on_grid(cfg.times, sample_grid);
  const auto limit_grid = detail::checked_grid(horizon, cfg.limit_step, "limit_step");
  const std::size_t stride = detail::stride_between(limit_grid, sample_grid, "limit_step");
  const std::uint64_t seed = *cfg.seed;

  const auto cov = detail::ttilde_covariance_for(cfg, params, horizon);
  const LightLimitSimulator limit(params, cfg.lambda, cfg.theta, cfg.service.variance(), cov, limit_grid);
  std::vector<SampledPath> limit_paths(cfg.limit_replications);
  std::vector<LimitDraw> exported(std::min(cfg.export_paths, cfg.limit_replications));
  parallel_for(cfg.limit_replications, cfg.workers, [&](std::size_t rep) {
    auto rng = derive_stream(seed, {"theorem1", "limit", rep});
    auto d = limit.draw(rng);
    limit_paths[rep] = detail::subsample(d.reflection.reflected, sample_grid, stride);
    if (rep < exported.size()) exported[rep] = std::move(d);
  });
  Ensemble limit_ens("Q~ limit", sample_grid);
  for (const auto& p : limit_paths) limit_ens.add(p);

  std::vector<LadderEnsemble> ladder;
  std::vector<double> rates;
  for (std::size_t n : cfg.n_ladder) {
    const double mu = service_rate_N(cfg.queue_config(n));
    rates.push_back(mu);
    std::vector<SampledPath> scaled(cfg.replications);
    parallel_for(cfg.replications, cfg.workers, [&](std::size_t rep) {
      const auto run = detail::simulate_queue_replication(cfg, n, mu, horizon, sample_grid, "theorem1", n, rep);
      scaled[rep] = scale_N(run.trace, n, mu).queue;
    });
    LadderEnsemble rung{static_cast<double>(n), n, Ensemble("Q~^N", sample_grid)};
    for (const auto& p : scaled) rung.ensemble.add(p);
    ladder.push_back(std::move(rung));
  }
  const auto rep = marginal_convergence_report(ladder, limit_ens, cfg.times, true);

  ExperimentResult res;
  res.pass = rep.pass();
  CsvTable report("experiment,N,t,statistic,critical,pass");
  detail::write_report_rows(report, "theorem1", rep);
  res.files.emplace_back("report.csv", report.str());

  std::ostringstream os;
  os << "Theorem 1 (reflecting Gaussian limit, N-scaling): lambda=" << format_number(cfg.lambda)
     << ", theta=" << format_number(cfg.theta) << ", sigma_v^2=" << format_number(cfg.service.variance())
     << ", gamma=" << format_number(params.gamma) << ", pi^2=" << format_number(params.pi2)
     << ", H=" << format_number(params.hurst) << '\n'
     << "  " << cfg.replications << " replications per rung, " << cfg.limit_replications
     << " limit draws on step " << format_number(cfg.limit_step) << '\n';
  for (std::size_t i = 0; i < cfg.n_ladder.size(); ++i) {
    os << "  N=" << cfg.n_ladder[i] << ": mu^N=" << format_number(rates[i]) << '\n';
  }
  os << detail::verdict_lines(rep, true);
  res.summary = os.str();

  if (!exported.empty()) {
    CsvTable paths("t,value,replication,process_name");
    for (std::size_t r = 0; r < exported.size(); ++r) {
      detail::append_paths(paths, exported[r].free, r, "X~");
      detail::append_paths(paths, exported[r].reflection.reflected, r, "Q~");
      detail::append_paths(paths, exported[r].reflection.regulator, r, "I~");
    }
    res.files.emplace_back("limit_paths.csv", paths.str());
  }
  return res;
}

/// Theorem 2: Q~^R(t) approaches reflected FBM along an R-ladder with N(R)
/// chosen by the fast-growth rule unless N is pinned.
inline ExperimentResult run_theorem2(const ExperimentConfig& cfg) {
  const auto params = limit_params(cfg.on, cfg.off);
  if (!params.long_range_dependent()) {
    throw RegimeError("theorem2 needs at least one infinite-variance period (alpha_min < 2)");
  }
  if (cfg.r_ladder.empty()) throw ConfigError("R_ladder", "theorem2 needs an R-ladder");
  const double horizon = cfg.times.back();
  const auto scaled_grid = detail::checked_grid(horizon, cfg.grid_step, "grid_step");
  detail::require_times_on_grid(cfg.times, scaled_grid);
  const auto limit_grid = detail::checked_grid(horizon, cfg.limit_step, "limit_step");
  const std::size_t stride = detail::stride_between(limit_grid, scaled_grid, "limit_step");
  const std::uint64_t seed = *cfg.seed;

  const HeavyLimitSimulator limit(params, cfg.lambda, cfg.theta, limit_grid);
  std::vector<SampledPath> limit_paths(cfg.limit_replications);
  std::vector<LimitDraw> exported(std::min(cfg.export_paths, cfg.limit_replications));
  parallel_for(cfg.limit_replications, cfg.workers, [&](std::size_t rep) {
    auto rng = derive_stream(seed, {"theorem2", "limit", rep});
    auto d = limit.draw(rng);
    limit_paths[rep] = detail::subsample(d.reflection.reflected, scaled_grid, stride);
    if (rep < exported.size()) exported[rep] = std::move(d);
  });
  Ensemble limit_ens("Q~_H limit", scaled_grid);
  for (const auto& p : limit_paths) limit_ens.add(p);

  std::vector<LadderEnsemble> ladder;
  CsvTable ladder_csv("R,N,growth_value,mu_R,d_R,U,V");
  std::ostringstream os;
  os << "Theorem 2 (reflecting FBM limit, R-scaling): lambda=" << format_number(cfg.lambda)
     << ", theta=" << format_number(cfg.theta) << ", alpha_min=" << format_number(params.alpha_min)
     << ", H=" << format_number(params.hurst) << ", pi^2=" << format_number(params.pi2)
     << ", L=" << format_number(params.c) << '\n'
     << "  " << cfg.replications << " replications per rung, " << cfg.limit_replications
     << " limit draws on step " << format_number(cfg.limit_step) << '\n';
  for (double r : cfg.r_ladder) {
    const auto fg = choose_N_fast_growth(r, params, cfg.epsilon, cfg.kappa);
    const std::size_t n = cfg.sources.value_or(fg.sources);
    auto qc = cfg.queue_config(n);
    qc.regime = Regime::r_scaling;
    qc.time_scale = r;
    const double mu = service_rate_R(qc, params);
    const double d_r = normalizer_dR(static_cast<double>(n), r, params);
    const auto uv = uv_diagnostic(r, params);
    ladder_csv.row(r, n, static_cast<double>(n) * r * params.tail_reference.complementary_cdf(r), mu, d_r,
                   uv.u, uv.v);
    os << "  R=" << format_number(r) << ": N=" << n << ", mu^R=" << format_number(mu)
       << ", d_R=" << format_number(d_r) << ", U(R)=" << format_number(uv.u)
       << ", V(R)=" << format_number(uv.v) << '\n';

    const TimeGrid physical{r * cfg.grid_step, scaled_grid.points};
    const auto level = static_cast<std::uint64_t>(std::llround(r * 1000.0));
    std::vector<SampledPath> scaled(cfg.replications);
    parallel_for(cfg.replications, cfg.workers, [&](std::size_t rep) {
      const auto run =
          detail::simulate_queue_replication(cfg, n, mu, physical.last(), physical, "theorem2", level, rep);
      scaled[rep] = scale_R(run.trace, r, mu, d_r, scaled_grid).queue;
    });
    LadderEnsemble rung{r, n, Ensemble("Q~^R", scaled_grid)};
    for (const auto& p : scaled) rung.ensemble.add(p);
    ladder.push_back(std::move(rung));
  }
  const auto rep = marginal_convergence_report(ladder, limit_ens, cfg.times, false);

  ExperimentResult res;
  res.pass = rep.pass();
  CsvTable report("experiment,N,t,statistic,critical,pass");
  detail::write_report_rows(report, "theorem2", rep);
  res.files.emplace_back("report.csv", report.str());
  res.files.emplace_back("ladder.csv", ladder_csv.str());
  os << detail::verdict_lines(rep, false);
  res.summary = os.str();
  if (!exported.empty()) {
    CsvTable paths("t,value,replication,process_name");
    for (std::size_t r = 0; r < exported.size(); ++r) {
      detail::append_paths(paths, exported[r].free, r, "lambda pi B_H - theta t");
      detail::append_paths(paths, exported[r].reflection.reflected, r, "Q~_H");
      detail::append_paths(paths, exported[r].reflection.regulator, r, "I~_H");
    }
    res.files.emplace_back("limit_paths.csv", paths.str());
  }
  return res;
}

/// Queue length and workload share one limit: the sup-gap between Q~^N and
/// L~^N shrinks with N.
inline ExperimentResult run_collapse(const ExperimentConfig& cfg) {
  if (cfg.n_ladder.empty()) throw ConfigError("N_ladder", "collapse needs an N-ladder");
  const auto grid = detail::checked_grid(cfg.horizon, cfg.grid_step, "grid_step");
  ExperimentResult res;
  CsvTable table("N,replications,median_gap,mean_gap");
  CsvTable report("experiment,N,t,statistic,critical,pass");
  std::ostringstream os;
  os << "State-space-collapse-like property (Q~^N vs L~^N share the Theorem 1 limit): horizon "
     << format_number(cfg.horizon) << ", grid step " << format_number(cfg.grid_step) << ", "
     << cfg.replications << " replications\n";
  std::vector<double> medians;
  for (std::size_t n : cfg.n_ladder) {
    const double mu = service_rate_N(cfg.queue_config(n));
    std::vector<double> gaps(cfg.replications);
    parallel_for(cfg.replications, cfg.workers, [&](std::size_t rep) {
      const auto run = detail::simulate_queue_replication(cfg, n, mu, cfg.horizon, grid, "collapse", n, rep);
      const auto s = scale_N(run.trace, n, mu);
      gaps[rep] = collapse_gap(s.queue, s.workload);
    });
    const double med = median(gaps);
    const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    medians.push_back(med);
    table.row(n, cfg.replications, med, mean);
    os << "  N=" << n << ": median sup-gap " << format_number(med) << ", mean " << format_number(mean) << '\n';
  }
  for (std::size_t i = 1; i < medians.size(); ++i) res.pass = res.pass && medians[i] < medians[i - 1];
  for (std::size_t i = 0; i < medians.size(); ++i) {
    const bool ok = i == 0 || medians[i] < medians[i - 1];
    report.row("collapse", cfg.n_ladder[i], cfg.horizon, medians[i], "", ok);
  }
  os << "  median gap strictly decreasing: " << (res.pass ? "PASS" : "FAIL") << '\n';
  res.summary = os.str();
  res.files.emplace_back("collapse.csv", table.str());
  res.files.emplace_back("report.csv", report.str());
  return res;
}

/// Var of T~^N(t) = (T^N(t) - N gamma t) / sqrt(N) against the limit variance.
inline ExperimentResult run_variance_curve(const ExperimentConfig& cfg) {
  const std::size_t n = cfg.sources.value_or(1000);
  const auto params = limit_params(cfg.on, cfg.off);
  const double horizon = cfg.times.back();
  const auto grid = detail::checked_grid(horizon, cfg.grid_step, "grid_step");
  detail::require_times_on_grid(cfg.times, grid);
  const double root = std::sqrt(static_cast<double>(n));
  std::vector<SampledPath> rows(cfg.replications);
  parallel_for(cfg.replications, cfg.workers, [&](std::size_t rep) {
    auto rng = derive_stream(*cfg.seed, {"variance-curve", n, rep, "sources"});
    const auto paths = detail::simulate_sources(cfg.on, cfg.off, n, horizon, rng);
    const auto sup = superpose(paths);
    SampledPath p(grid);
    for (std::size_t k = 0; k < grid.points; ++k) {
      const double t = grid.time(k);
      p.values[k] = (sup.cumulative_on_time(t) - static_cast<double>(n) * params.gamma * t) / root;
    }
    rows[rep] = std::move(p);
  });
  Ensemble ens("T~^N", grid);
  for (const auto& r : rows) ens.add(r);
  const auto curve = empirical_variance_curve(ens, cfg.times);
  const auto cov = detail::ttilde_covariance_for(cfg, params, horizon);

  ExperimentResult res;
  CsvTable table("t,variance,stderr,reference,relative_error,pass");
  std::ostringstream os;
  os << "Variance of the centred cumulative ON time (Theorem 1 ingredient T~): N=" << n << ", "
     << cfg.replications << " superpositions, reference mode "
     << (cov.mode() == TtildeCovariance::Mode::markov_exact       ? "markov-exact"
         : cov.mode() == TtildeCovariance::Mode::asymptotic_heavy ? "asymptotic-heavy"
                                                                  : "tabulated (experimental)")
     << '\n';
  for (const auto& pt : curve) {
    const double ref = cov.variance(pt.t);
    const double rel = std::abs(pt.variance - ref) / ref;
    const bool ok = rel <= cfg.relative_tolerance;
    res.pass = res.pass && ok;
    table.row(pt.t, pt.variance, pt.standard_error, ref, rel, ok);
    os << "  t=" << format_number(pt.t) << ": Var " << format_number(pt.variance) << " +- "
       << format_number(pt.standard_error) << ", reference " << format_number(ref) << ", rel. error "
       << format_number(rel) << " -> " << (ok ? "PASS" : "FAIL") << '\n';
  }
  if (!params.long_range_dependent()) {
    const auto& last = curve.back();
    const double slope = last.variance / last.t;
    const double rel = std::abs(slope - params.pi2) / params.pi2;
    const bool ok = rel <= cfg.slope_tolerance;
    res.pass = res.pass && ok;
    os << "  Var/t at t=" << format_number(last.t) << ": " << format_number(slope) << " vs pi^2 "
       << format_number(params.pi2) << " (rel. error " << format_number(rel) << ") -> "
       << (ok ? "PASS" : "FAIL") << '\n';
  }
  res.summary = os.str();
  res.files.emplace_back("variance.csv", table.str());
  return res;
}

/// Hurst recovery: exact fGn at the configured indices, then packet counts
/// per bin from the configured ON/OFF superposition.
inline ExperimentResult run_hurst(const ExperimentConfig& cfg) {
  const std::uint64_t seed = *cfg.seed;
  const std::size_t len = cfg.series_length;
  ExperimentResult res;
  CsvTable table("series,target_low,target_high,estimate,stderr,pass");
  CsvTable blocks("series,block_size,variance");
  std::ostringstream os;
  os << "Hurst index recovery (H = (3 - alpha_min)/2), aggregated-variance estimator, " << cfg.replications
     << " series of length " << len << '\n';

  auto record = [&](const std::string& name, const HurstEstimate& est, double lo, double hi) {
    const bool ok = est.hurst >= lo && est.hurst <= hi;
    res.pass = res.pass && ok;
    table.row(name, lo, hi, est.hurst, est.standard_error, ok);
    for (std::size_t i = 0; i < est.block_sizes.size(); ++i) blocks.row(name, est.block_sizes[i], est.variances[i]);
    os << "  " << name << ": H^ = " << format_number(est.hurst) << " +- " << format_number(est.standard_error)
       << " (accept [" << format_number(lo) << ", " << format_number(hi) << "]) -> " << (ok ? "PASS" : "FAIL")
       << '\n';
  };

  for (double h : cfg.fgn_hurst) {
    const FbmGenerator gen(h, TimeGrid{1.0, len + 1});
    std::vector<std::vector<double>> series(cfg.replications);
    const auto label = static_cast<std::uint64_t>(std::llround(h * 1e6));
    parallel_for(cfg.replications, cfg.workers, [&](std::size_t rep) {
      auto rng = derive_stream(seed, {"hurst", "fgn", label, rep});
      series[rep] = gen.draw_increments(rng);
    });
    const auto est = estimate_hurst(series, cfg.min_exp, cfg.max_exp);
    record("fgn H=" + format_number(h), est, h - cfg.hurst_tolerance, h + cfg.hurst_tolerance);
  }

  if (cfg.sources) {
    const std::size_t n = *cfg.sources;
    const double horizon = static_cast<double>(len) * cfg.bin;
    std::vector<std::vector<double>> series(cfg.replications);
    parallel_for(cfg.replications, cfg.workers, [&](std::size_t rep) {
      auto rng = derive_stream(seed, {"hurst", n, rep, "sources"});
      const auto paths = detail::simulate_sources(cfg.on, cfg.off, n, horizon, rng);
      auto streams = detail::source_streams(seed, "hurst", n, rep, "arrivals", n);
      const auto arr = arrivals_direct(paths, cfg.lambda, streams);
      std::vector<double> counts(len, 0.0);
      for (double e : arr.epochs) {
        const auto b = std::min(len - 1, static_cast<std::size_t>(e / cfg.bin));
        counts[b] += 1.0;
      }
      series[rep] = std::move(counts);
    });
    const auto params = limit_params(cfg.on, cfg.off);
    const auto est = estimate_hurst(series, cfg.min_exp, cfg.max_exp);
    os << "  arrival counts from N=" << n << " sources, ON " << cfg.on.describe() << ", OFF "
       << cfg.off.describe() << " (model H=" << format_number(params.hurst) << ")\n";
    record("arrivals N=" + std::to_string(n), est, cfg.hurst_low, cfg.hurst_high);
  }
  res.summary = os.str();
  res.files.emplace_back("hurst.csv", table.str());
  res.files.emplace_back("hurst_blocks.csv", blocks.str());
  return res;
}

/// Validate and dispatch. Throws ConfigError / RegimeError for bad input.
inline ExperimentResult execute(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.experiment) {
    case Experiment::params: return run_params(cfg);
    case Experiment::simulate: return run_simulate(cfg);
    case Experiment::lemma1: return run_lemma1(cfg);
    case Experiment::theorem1: return run_theorem1(cfg);
    case Experiment::theorem2: return run_theorem2(cfg);
    case Experiment::collapse: return run_collapse(cfg);
    case Experiment::variance_curve: return run_variance_curve(cfg);
    case Experiment::hurst: return run_hurst(cfg);
  }
  throw ConfigError("experiment", "unhandled experiment");
}

/// execute() and write every artifact plus summary.txt into cfg.out.
inline ExperimentResult run(const ExperimentConfig& cfg) {
  auto res = execute(cfg);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out);
  for (const auto& [name, content] : res.files) {
    std::ofstream(fs::path(cfg.out) / name, std::ios::binary) << content;
  }
  std::ofstream(fs::path(cfg.out) / "summary.txt", std::ios::binary)
      << "experiment: " << to_string(cfg.experiment) << "\nseed: " << (cfg.seed ? std::to_string(*cfg.seed) : std::string("none")) << '\n'
      << res.summary << "verdict: " << (res.pass ? "PASS" : "FAIL") << '\n';
  return res;
}

}  // namespace onoff
