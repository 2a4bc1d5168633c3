#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "onoff/grid.hpp"

namespace onoff {

/// Replications x grid values of one process.
class Ensemble {
 public:
  Ensemble(std::string process, TimeGrid grid) : process_(std::move(process)), grid_(grid) {}

  void add(std::span<const double> row, std::uint64_t seed = 0) {
    if (row.size() != grid_.points) throw std::invalid_argument("row does not match ensemble grid");
    values_.insert(values_.end(), row.begin(), row.end());
    seeds_.push_back(seed);
  }
  void add(const SampledPath& p, std::uint64_t seed = 0) {
    if (!(p.grid == grid_)) throw std::invalid_argument("path grid differs from ensemble grid");
    add(std::span<const double>(p.values), seed);
  }

  const std::string& process() const noexcept { return process_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t replications() const noexcept { return seeds_.size(); }
  std::span<const std::uint64_t> seeds() const noexcept { return seeds_; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * grid_.points, grid_.points);
  }

  /// Values of every replication at grid time t.
  std::vector<double> column(double t) const {
    const std::size_t k = grid_.index_of(t);
    std::vector<double> out(replications());
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = values_[r * grid_.points + k];
    return out;
  }

 private:
  std::string process_;
  TimeGrid grid_;
  std::vector<double> values_;
  std::vector<std::uint64_t> seeds_;
};

// ---------------------------------------------------------------------------

struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;  // asymptotic two-sample critical value at level alpha
  double p_value = 1.0;   // asymptotic Kolmogorov approximation

  bool reject() const noexcept { return statistic > critical; }
};

/// c(alpha) in the two-sample critical value c(alpha) sqrt((n+m)/(nm)).
inline double ks_coefficient(double alpha) { return std::sqrt(-0.5 * std::log(alpha / 2.0)); }

/// Complementary Kolmogorov distribution, P(K > x).
inline double kolmogorov_survival(double x) {
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                              double alpha = 0.01) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS test needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  KsResult r;
  r.statistic = d;
  const double ne = n * m / (n + m);
  r.critical = ks_coefficient(alpha) / std::sqrt(ne);
  const double root = std::sqrt(ne);
  r.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
  return r;
}

// ---------------------------------------------------------------------------

struct HurstEstimate {
  double hurst = 0.5;
  double standard_error = 0.0;
  std::vector<double> block_sizes;
  std::vector<double> variances;  // variance of block sums
};

/// Aggregated-variance estimator. Block sums over m = 2^min_exp .. 2^max_exp
/// consecutive increments are pooled across replications; the slope of
/// log Var(block sum) on log m is 2H. max_exp defaults to log2(length) - 4
/// so the largest blocks still number 16 per replication.
inline HurstEstimate estimate_hurst(const std::vector<std::vector<double>>& series,
                                    int min_exp = 0, int max_exp = -1) {
  if (series.size() < 32) throw std::invalid_argument("Hurst estimation needs >= 32 replications");
  const std::size_t len = series.front().size();
  if (len < 1024) throw std::invalid_argument("Hurst estimation needs series of length >= 1024");
  for (const auto& s : series) {
    if (s.size() != len) throw std::invalid_argument("series lengths differ");
  }
  if (max_exp < 0) max_exp = static_cast<int>(std::floor(std::log2(static_cast<double>(len)))) - 4;
  if (min_exp < 0 || max_exp <= min_exp) throw std::invalid_argument("bad block-size range");

  double total = 0.0;
  for (const auto& s : series) total += std::accumulate(s.begin(), s.end(), 0.0);
  const double mean = total / static_cast<double>(series.size() * len);

  HurstEstimate est;
  for (int e = min_exp; e <= max_exp; ++e) {
    const std::size_t m = std::size_t{1} << e;
    const std::size_t blocks = len / m;
    double ss = 0.0;
    std::size_t count = 0;
    for (const auto& s : series) {
      for (std::size_t b = 0; b < blocks; ++b) {
        double sum = 0.0;
        for (std::size_t k = b * m; k < (b + 1) * m; ++k) sum += s[k] - mean;
        ss += sum * sum;
        ++count;
      }
    }
    const double var = ss / static_cast<double>(count - 1);
    if (!(var > 0.0)) throw std::domain_error("degenerate (constant) series");
    est.block_sizes.push_back(static_cast<double>(m));
    est.variances.push_back(var);
  }

  // ordinary least squares of log var on log m
  const std::size_t k = est.block_sizes.size();
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    lx[i] = std::log(est.block_sizes[i]);
    ly[i] = std::log(est.variances[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(k);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ly[i] - (my + slope * (lx[i] - mx));
    sse += r * r;
  }
  const double slope_se = k > 2 ? std::sqrt(sse / static_cast<double>(k - 2) / sxx) : 0.0;
  est.hurst = slope / 2.0;
  est.standard_error = slope_se / 2.0;
  return est;
}

// ---------------------------------------------------------------------------

struct VariancePoint {
  double t = 0.0;
  double variance = 0.0;
  double standard_error = 0.0;
};

/// Pointwise sample variance across replications. The standard error uses
/// the fourth central moment, sqrt((m4 - s^4) / n).
inline std::vector<VariancePoint> empirical_variance_curve(const Ensemble& ens,
                                                           std::span<const double> times) {
  if (ens.replications() < 2) throw std::invalid_argument("need at least two replications");
  std::vector<VariancePoint> out;
  const double n = static_cast<double>(ens.replications());
  for (double t : times) {
    const auto col = ens.column(t);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : col) {
      const double d = (v - mean) * (v - mean);
      m2 += d;
      m4 += d * d;
    }
    const double var = m2 / (n - 1.0);
    const double pop = m2 / n;
    const double se = std::sqrt(std::max(m4 / n - pop * pop, 0.0) / n);
    out.push_back({t, var, se});
  }
  return out;
}

/// Sup-norm distance between two paths on the same grid.
inline double collapse_gap(const SampledPath& q, const SampledPath& l) {
  if (!(q.grid == l.grid)) throw std::invalid_argument("collapse_gap: grids differ");
  double gap = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) gap = std::max(gap, std::abs(q.values[k] - l.values[k]));
  return gap;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------

/// One rung of an N- or R-ladder.
struct LadderEnsemble {
  double level = 0.0;          // N for N-ladders, R for R-ladders
  std::size_t sources = 0;     // N actually simulated
  Ensemble ensemble;
};

struct ConvergenceRow {
  double level = 0.0;
  std::size_t sources = 0;
  double t = 0.0;
  KsResult ks;
};

struct ConvergenceVerdict {
  double t = 0.0;
  double first_statistic = 0.0;
  double last_statistic = 0.0;
  double last_critical = 0.0;
  bool decreased = false;          // last rung < first rung
  bool strictly_monotone = false;  // every rung below the previous one
  bool within_bound = false;       // last rung < 2 x critical
  bool pass = false;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceVerdict> verdicts;

  bool pass() const noexcept {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.pass; });
  }
};

/// Fixed-time KS distances between each rung and the limit ensemble. A time
/// passes when the statistic at the last rung is below the one at the first
/// rung and, if `require_bound`, below twice its critical value.
inline ConvergenceReport marginal_convergence_report(std::span<const LadderEnsemble> ladder,
                                                     const Ensemble& limit,
                                                     std::span<const double> times,
                                                     bool require_bound = true, double alpha = 0.01) {
  if (ladder.empty()) throw std::invalid_argument("empty ladder");
  ConvergenceReport rep;
  for (double t : times) {
    const auto lim = limit.column(t);
    std::vector<double> stats;
    ConvergenceVerdict v;
    v.t = t;
    for (const auto& rung : ladder) {
      const auto col = rung.ensemble.column(t);
      const auto ks = ks_two_sample(col, lim, alpha);
      rep.rows.push_back({rung.level, rung.sources, t, ks});
      stats.push_back(ks.statistic);
      v.last_critical = ks.critical;
    }
    v.first_statistic = stats.front();
    v.last_statistic = stats.back();
    v.decreased = stats.size() > 1 && v.last_statistic < v.first_statistic;
    v.strictly_monotone = stats.size() > 1;
    for (std::size_t i = 1; i < stats.size(); ++i) v.strictly_monotone &= stats[i] < stats[i - 1];
    v.within_bound = v.last_statistic < 2.0 * v.last_critical;
    v.pass = v.decreased && (!require_bound || v.within_bound);
    rep.verdicts.push_back(v);
  }
  return rep;
}

}  // namespace onoff
