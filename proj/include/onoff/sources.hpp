#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "onoff/distributions.hpp"
#include "onoff/random.hpp"

namespace onoff {

enum class Phase : std::uint8_t { off = 0, on = 1 };

constexpr Phase flip(Phase p) noexcept { return p == Phase::on ? Phase::off : Phase::on; }

/// Piecewise-linear, non-decreasing cumulative clock t -> C(t) with integer
/// slopes. Shared by the per-source ON time T_n and the aggregate T^N.
class CumulativeClock {
 public:
  CumulativeClock() = default;

  /// `breaks` starts at 0 and is strictly increasing; `slopes[k]` holds on
  /// [breaks[k], breaks[k+1]) (the last slope runs to `horizon`).
  CumulativeClock(std::vector<double> breaks, std::vector<int> slopes, double horizon)
      : breaks_(std::move(breaks)), slopes_(std::move(slopes)), horizon_(horizon) {
    cumulative_.resize(breaks_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < breaks_.size(); ++k) {
      cumulative_[k] = acc;
      const double end = k + 1 < breaks_.size() ? breaks_[k + 1] : horizon_;
      acc += slopes_[k] * (end - breaks_[k]);
    }
    total_ = acc;
  }

  double horizon() const noexcept { return horizon_; }

  /// Slope at t (right-continuous).
  int rate(double t) const noexcept {
    return slopes_[segment(t)];
  }

  double operator()(double t) const {
    if (t < 0.0 || t > horizon_) throw std::out_of_range("time outside [0, horizon]");
    if (t == horizon_) return total_;
    const std::size_t k = segment(t);
    return cumulative_[k] + slopes_[k] * (t - breaks_[k]);
  }

  double total() const noexcept { return total_; }

  /// Generalized inverse inf{t : C(t) >= s} for s in (0, total()].
  double inverse(double s) const noexcept {
    // first index with cumulative >= s; the segment before it carries s.
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), s);
    std::size_t j = static_cast<std::size_t>(it - cumulative_.begin());
    if (j == 0) return 0.0;
    std::size_t k = j - 1;
    return breaks_[k] + (s - cumulative_[k]) / slopes_[k];
  }

  std::span<const double> breaks() const noexcept { return breaks_; }
  std::span<const int> slopes() const noexcept { return slopes_; }

 private:
  std::size_t segment(double t) const noexcept {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    return it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
  }

  std::vector<double> breaks_{0.0};
  std::vector<int> slopes_{0};
  std::vector<double> cumulative_{0.0};
  double horizon_ = 0.0;
  double total_ = 0.0;
};

/// One source's alternating ON/OFF trajectory on [0, horizon].
class BinarySourcePath {
 public:
  BinarySourcePath(Phase initial, std::vector<double> epochs, double horizon)
      : initial_(initial), epochs_(std::move(epochs)), horizon_(horizon) {
    if (horizon_ < 0.0) throw std::invalid_argument("horizon must be >= 0");
    double prev = 0.0;
    for (double e : epochs_) {
      if (!(e > prev) || e > horizon_) {
        throw std::invalid_argument("switch epochs must be strictly increasing within (0, horizon]");
      }
      prev = e;
    }
    std::vector<double> breaks{0.0};
    std::vector<int> slopes{initial_ == Phase::on ? 1 : 0};
    Phase p = initial_;
    for (double e : epochs_) {
      p = flip(p);
      breaks.push_back(e);
      slopes.push_back(p == Phase::on ? 1 : 0);
    }
    clock_ = CumulativeClock(std::move(breaks), std::move(slopes), horizon_);
  }

  Phase initial_phase() const noexcept { return initial_; }
  std::span<const double> epochs() const noexcept { return epochs_; }
  double horizon() const noexcept { return horizon_; }

  /// W_n(t), right-continuous.
  int state(double t) const noexcept { return clock_.rate(t); }

  /// T_n(t) = int_0^t W_n(s) ds.
  double cumulative_on_time(double t) const { return clock_(t); }

  const CumulativeClock& clock() const noexcept { return clock_; }

 private:
  Phase initial_;
  std::vector<double> epochs_;
  double horizon_;
  CumulativeClock clock_;
};

/// Stationary probability that a source is ON: mu_on / (mu_on + mu_off).
inline double stationary_on_probability(double mean_on, double mean_off) {
  if (!(mean_on > 0.0) || !(mean_off > 0.0)) {
    throw std::invalid_argument("period means must be positive");
  }
  return mean_on / (mean_on + mean_off);
}

/// Simulate one stationary ON/OFF source on [0, horizon]. The initial phase
/// is ON with the stationary probability and the first (residual) period is
/// drawn from the equilibrium law of that phase.
inline BinarySourcePath simulate_source(const PeriodDistribution& on, const PeriodDistribution& off,
                                        double horizon, RandomStream& rng) {
  if (horizon < 0.0) throw std::invalid_argument("horizon must be >= 0");
  const double gamma = stationary_on_probability(on.mean(), off.mean());
  Phase phase = rng.uniform_open() < gamma ? Phase::on : Phase::off;
  const Phase initial = phase;
  std::vector<double> epochs;
  double t = sample_equilibrium_residual(phase == Phase::on ? on : off, rng);
  while (t <= horizon && horizon > 0.0) {
    epochs.push_back(t);
    phase = flip(phase);
    t += sample_period(phase == Phase::on ? on : off, rng);
  }
  return BinarySourcePath(initial, std::move(epochs), horizon);
}

/// Cumulative ON time of `path` at t.
inline double cumulative_on_time(const BinarySourcePath& path, double t) {
  return path.cumulative_on_time(t);
}

/// Aggregate W^N(t) = sum_n W_n(t) and T^N(t) = int_0^t W^N.
class SuperpositionPath {
 public:
  SuperpositionPath() = default;
  SuperpositionPath(CumulativeClock clock, std::size_t sources)
      : clock_(std::move(clock)), sources_(sources) {}

  int level(double t) const noexcept { return clock_.rate(t); }
  double cumulative_on_time(double t) const { return clock_(t); }
  double horizon() const noexcept { return clock_.horizon(); }
  std::size_t sources() const noexcept { return sources_; }
  const CumulativeClock& clock() const noexcept { return clock_; }

 private:
  CumulativeClock clock_;
  std::size_t sources_ = 0;
};

inline SuperpositionPath superpose(std::span<const BinarySourcePath> paths) {
  if (paths.empty()) throw std::invalid_argument("superpose needs at least one path");
  const double horizon = paths.front().horizon();
  int level = 0;
  std::vector<std::pair<double, int>> changes;
  for (const auto& p : paths) {
    if (p.horizon() != horizon) throw std::invalid_argument("paths have mismatched horizons");
    level += p.initial_phase() == Phase::on ? 1 : 0;
    Phase ph = p.initial_phase();
    for (double e : p.epochs()) {
      ph = flip(ph);
      changes.emplace_back(e, ph == Phase::on ? 1 : -1);
    }
  }
  std::sort(changes.begin(), changes.end());
  std::vector<double> breaks{0.0};
  std::vector<int> slopes{level};
  for (const auto& [t, delta] : changes) {
    level += delta;
    if (t == breaks.back()) {
      slopes.back() = level;
    } else {
      breaks.push_back(t);
      slopes.push_back(level);
    }
  }
  return SuperpositionPath(CumulativeClock(std::move(breaks), std::move(slopes), horizon),
                           paths.size());
}

/// Sorted packet arrival epochs on [0, horizon].
struct ArrivalStream {
  enum class Mode { direct, modulated };

  std::vector<double> epochs;
  /// Originating source per epoch; empty for modulated streams, which
  /// do not attribute packets to sources.
  std::vector<std::uint32_t> source_ids;
  double horizon = 0.0;
  Mode mode = Mode::direct;

  /// A(t): number of arrivals in [0, t].
  std::size_t count(double t) const noexcept {
    return static_cast<std::size_t>(std::upper_bound(epochs.begin(), epochs.end(), t) -
                                    epochs.begin());
  }
};

namespace detail {

// Rate-lambda Poisson points on the clock's own axis, mapped back to
// physical time through the clock's generalized inverse.
inline std::vector<double> poisson_on_clock(const CumulativeClock& clock, double lambda,
                                            RandomStream& rng) {
  std::vector<double> out;
  const double total = clock.total();
  double s = -std::log(rng.uniform_open()) / lambda;
  while (s <= total) {
    out.push_back(clock.inverse(s));
    s += -std::log(rng.uniform_open()) / lambda;
  }
  return out;
}

}  // namespace detail

/// A_n: rate-lambda Poisson clock that runs only while the source is ON.
inline ArrivalStream arrivals_direct(const BinarySourcePath& path, double lambda,
                                     RandomStream& rng) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  ArrivalStream out;
  out.epochs = detail::poisson_on_clock(path.clock(), lambda, rng);
  out.source_ids.assign(out.epochs.size(), 0);
  out.horizon = path.horizon();
  out.mode = ArrivalStream::Mode::direct;
  return out;
}

/// A^N as the merge of per-source direct streams. Source n draws from
/// streams[n].
inline ArrivalStream arrivals_direct(std::span<const BinarySourcePath> paths, double lambda,
                                     std::span<RandomStream> streams) {
  if (paths.size() != streams.size()) throw std::invalid_argument("one stream per source");
  if (paths.empty()) throw std::invalid_argument("no sources");
  std::vector<std::pair<double, std::uint32_t>> all;
  for (std::size_t n = 0; n < paths.size(); ++n) {
    for (double e : arrivals_direct(paths[n], lambda, streams[n]).epochs) {
      all.emplace_back(e, static_cast<std::uint32_t>(n));
    }
  }
  std::sort(all.begin(), all.end());
  ArrivalStream out;
  out.epochs.reserve(all.size());
  out.source_ids.reserve(all.size());
  for (const auto& [e, id] : all) {
    out.epochs.push_back(e);
    out.source_ids.push_back(id);
  }
  out.horizon = paths.front().horizon();
  out.mode = ArrivalStream::Mode::direct;
  return out;
}

/// A(T^N(.)): a single rate-lambda Poisson stream on the aggregate ON-time
/// axis, mapped back through the inverse of T^N.
inline ArrivalStream arrivals_modulated(const SuperpositionPath& sup, double lambda,
                                        RandomStream& rng) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  ArrivalStream out;
  out.epochs = detail::poisson_on_clock(sup.clock(), lambda, rng);
  out.horizon = sup.horizon();
  out.mode = ArrivalStream::Mode::modulated;
  return out;
}

}  // namespace onoff
