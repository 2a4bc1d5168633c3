#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "onoff/distributions.hpp"
#include "onoff/errors.hpp"
#include "onoff/grid.hpp"
#include "onoff/random.hpp"
#include "onoff/sources.hpp"

namespace onoff {

enum class Regime { n_scaling, r_scaling };

struct QueueConfig {
  std::size_t sources = 1;  // N
  double lambda = 1.0;      // per-source Poisson rate while ON
  double theta = 1.0;       // heavy-traffic drift constant
  PeriodDistribution on = PeriodDistribution::exponential(1.0);
  PeriodDistribution off = PeriodDistribution::exponential(1.0);
  ServiceDistribution service = ServiceDistribution::deterministic();
  Regime regime = Regime::n_scaling;
  double time_scale = 1.0;  // R, R-scaling only
  double horizon = 1.0;

  void validate() const {
    if (sources < 1) throw ConfigError("N", "need at least one source");
    if (!(lambda > 0.0)) throw ConfigError("lambda", "must be positive");
    if (!(theta > 0.0)) throw ConfigError("theta", "must be positive");
    if (!(horizon > 0.0)) throw ConfigError("horizon", "must be positive");
    if (regime == Regime::r_scaling && !(time_scale >= 1.0)) {
      throw ConfigError("R", "time scale must be >= 1");
    }
  }

  double gamma() const { return stationary_on_probability(on.mean(), off.mean()); }
};

/// Heavy-traffic service rate under N-scaling: N lambda gamma + theta sqrt(N).
inline double service_rate_N(const QueueConfig& cfg) {
  if (cfg.regime != Regime::n_scaling) throw RegimeError("service_rate_N needs N-scaling");
  const double n = static_cast<double>(cfg.sources);
  return n * cfg.lambda * cfg.gamma() + cfg.theta * std::sqrt(n);
}

/// Queue state sampled on a uniform grid, plus end-of-run totals.
struct QueueTrace {
  TimeGrid grid;
  std::vector<std::size_t> queue_length;  // Q^N, packets
  std::vector<double> workload;           // L^N, time units
  std::vector<double> busy_time;          // B^N, time units
  std::size_t arrivals = 0;               // arrivals in [0, end]
  std::size_t departures = 0;             // departures in [0, end]
  std::vector<std::size_t> departure_order;  // arrival index of each departure
  double completed_service = 0.0;            // sum of finished service times
  double in_progress_elapsed = 0.0;          // service already given to the head job at end
  double service_rate = 0.0;

  double end() const noexcept { return grid.last(); }
};

namespace detail {

inline void check_queue_inputs(const ArrivalStream& arrivals, double mu, const TimeGrid& grid) {
  if (!(mu > 0.0)) throw std::invalid_argument("service rate must be positive");
  if (grid.points == 0) throw std::invalid_argument("empty grid");
  if (grid.last() > arrivals.horizon * (1.0 + 1e-12)) {
    throw std::invalid_argument("grid extends beyond the arrival horizon");
  }
}

}  // namespace detail

/// Event-driven FIFO, non-idling single server. `work[i]` is the unit-mean
/// work v(i) of the i-th arrival; its service time is work[i] / mu. Only
/// arrivals up to the last grid point are processed.
inline QueueTrace simulate_queue(const ArrivalStream& arrivals, std::span<const double> work,
                                 double mu, const TimeGrid& grid) {
  detail::check_queue_inputs(arrivals, mu, grid);
  const double end = grid.last();
  const std::size_t n_arr = arrivals.count(end);
  if (work.size() < n_arr) throw std::invalid_argument("fewer work samples than arrivals");

  QueueTrace tr;
  tr.grid = grid;
  tr.service_rate = mu;
  tr.queue_length.resize(grid.points);
  tr.workload.resize(grid.points);
  tr.busy_time.resize(grid.points);

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::deque<std::size_t> in_system;  // arrival indices; front is in service
  double waiting_work = 0.0;          // service time of jobs not yet started
  double head_start = 0.0;
  double head_departure = inf;
  double busy_accum = 0.0;  // busy time of finished busy periods
  double period_start = 0.0;
  std::size_t next = 0;
  std::size_t g = 0;

  auto service_time = [&](std::size_t i) { return work[i] / mu; };
  auto start_head = [&](double now) {
    const double s = service_time(in_system.front());
    waiting_work -= s;
    head_start = now;
    head_departure = now + s;
  };

  for (;;) {
    const double t_arr = next < n_arr ? arrivals.epochs[next] : inf;
    const double t_next = std::min(t_arr, head_departure);

    // Grid points strictly before the next event see the current state.
    while (g < grid.points && grid.time(g) < t_next) {
      const double t = grid.time(g);
      tr.queue_length[g] = in_system.size();
      if (in_system.empty()) {
        tr.busy_time[g] = busy_accum;
        tr.workload[g] = 0.0;
      } else {
        tr.busy_time[g] = busy_accum + (t - period_start);
        tr.workload[g] = (head_departure - t) + waiting_work;
      }
      ++g;
    }
    if (t_next > end || t_next == inf) break;

    if (head_departure <= t_arr) {
      const double now = head_departure;
      tr.completed_service += head_departure - head_start;
      tr.departure_order.push_back(in_system.front());
      in_system.pop_front();
      ++tr.departures;
      if (in_system.empty()) {
        busy_accum += now - period_start;
        head_departure = inf;
        waiting_work = 0.0;
      } else {
        start_head(now);
      }
    } else {
      const double now = t_arr;
      in_system.push_back(next);
      waiting_work += service_time(next);
      ++next;
      if (in_system.size() == 1) {
        period_start = now;
        start_head(now);
      }
    }
  }
  tr.arrivals = next;
  if (!in_system.empty()) tr.in_progress_elapsed = end - head_start;
  return tr;
}

/// Same as above, drawing one unit-mean work sample per arrival, in arrival
/// order, from `rng`.
inline QueueTrace simulate_queue(const ArrivalStream& arrivals, const ServiceDistribution& svc,
                                 double mu, const TimeGrid& grid, RandomStream& rng) {
  detail::check_queue_inputs(arrivals, mu, grid);
  const std::size_t n = arrivals.count(grid.last());
  std::vector<double> work(n);
  for (auto& w : work) w = svc.sample(rng);
  return simulate_queue(arrivals, work, mu, grid);
}

/// Unfinished work on `grid` from the workload recursion
/// W_k = max(W_{k-1} - (a_k - a_{k-1}), 0) + s_k with linear drain between
/// arrivals. Independent of the event engine.
inline std::vector<double> lindley_oracle(const ArrivalStream& arrivals, std::span<const double> work,
                                          double mu, const TimeGrid& grid) {
  std::vector<double> out(grid.points, 0.0);
  double w = 0.0;
  double last = 0.0;
  std::size_t k = 0;
  for (std::size_t g = 0; g < grid.points; ++g) {
    const double t = grid.time(g);
    while (k < arrivals.epochs.size() && arrivals.epochs[k] <= t) {
      w = std::max(w - (arrivals.epochs[k] - last), 0.0) + work[k] / mu;
      last = arrivals.epochs[k];
      ++k;
    }
    out[g] = std::max(w - (t - last), 0.0);
  }
  return out;
}

}  // namespace onoff
