#pragma once

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

namespace onoff {

/// Uniform grid 0, step, 2*step, ..., (points-1)*step.
struct TimeGrid {
  double step = 1.0;
  std::size_t points = 0;

  static TimeGrid covering(double horizon, double step) {
    if (!(step > 0.0) || !(horizon >= 0.0)) throw std::invalid_argument("bad grid");
    const auto intervals = static_cast<std::size_t>(std::llround(horizon / step));
    if (std::abs(static_cast<double>(intervals) * step - horizon) > 1e-9 * std::max(1.0, horizon)) {
      throw std::invalid_argument("grid step must divide the horizon");
    }
    return {step, intervals + 1};
  }

  double time(std::size_t k) const noexcept { return static_cast<double>(k) * step; }
  double last() const noexcept { return points == 0 ? 0.0 : time(points - 1); }

  /// Index of grid time t; throws if t is not (within 1e-9 relative) a grid point.
  std::size_t index_of(double t) const {
    const double x = t / step;
    const auto k = static_cast<std::size_t>(std::llround(x));
    if (t < 0.0 || k >= points || std::abs(static_cast<double>(k) - x) > 1e-9 * std::max(1.0, x)) {
      throw std::out_of_range("time is not on the grid");
    }
    return k;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Values of a process on a uniform grid.
struct SampledPath {
  TimeGrid grid;
  std::vector<double> values;

  SampledPath() = default;
  explicit SampledPath(TimeGrid g) : grid(g), values(g.points, 0.0) {}
  SampledPath(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.points) throw std::invalid_argument("values do not match grid");
  }

  double at(double t) const { return values[grid.index_of(t)]; }
  std::size_t size() const noexcept { return values.size(); }
};

}  // namespace onoff
