#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "onoff/grid.hpp"
#include "onoff/limits.hpp"
#include "onoff/random.hpp"

namespace onoff {

// ---------------------------------------------------------------------------
// Brownian motion

/// Brownian path with variance rate `variance_rate`, started at 0.
inline SampledPath bm_path(double variance_rate, const TimeGrid& grid, RandomStream& rng) {
  if (variance_rate < 0.0) throw std::invalid_argument("variance rate must be >= 0");
  SampledPath path(grid);
  if (grid.points == 0) return path;
  std::normal_distribution<double> normal;
  const double sd = std::sqrt(variance_rate * grid.step);
  double x = 0.0;
  for (std::size_t k = 1; k < grid.points; ++k) {
    x += sd * normal(rng);
    path.values[k] = x;
  }
  return path;
}

// ---------------------------------------------------------------------------
// Fractional Brownian motion, circulant embedding (Davies-Harte)

/// Autocovariance of unit-step fractional Gaussian noise at lag k.
inline double fgn_autocovariance(double hurst, double k) {
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(std::abs(k + 1.0), h2) - 2.0 * std::pow(std::abs(k), h2) +
                std::pow(std::abs(k - 1.0), h2));
}

/// Exact sampler of fGn / FBM on a fixed grid. The embedding spectrum is
/// computed once; draws are thread-safe given separate streams.
class FbmGenerator {
 public:
  FbmGenerator(double hurst, TimeGrid grid) : hurst_(hurst), grid_(grid) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("Hurst index must lie in (0, 1)");
    increments_ = grid.points > 0 ? grid.points - 1 : 0;
    if (increments_ == 0) return;
    std::size_t m = 2;
    while (m < 2 * increments_) m *= 2;
    for (int attempt = 0; attempt < 4; ++attempt, m *= 2) {
      if (embed(m)) return;
    }
    throw std::runtime_error("circulant embedding is not nonnegative definite for H=" +
                             std::to_string(hurst));
  }

  double hurst() const noexcept { return hurst_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t embedding_size() const noexcept { return sqrt_eigen_.size(); }

  /// fGn on the grid: increments of B_H over consecutive grid cells.
  std::vector<double> draw_increments(RandomStream& rng) const {
    std::vector<double> out(increments_);
    if (increments_ == 0) return out;
    const std::size_t m = sqrt_eigen_.size();
    std::normal_distribution<double> normal;
    std::vector<std::complex<double>> w(m), x(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double re = normal(rng);
      const double im = normal(rng);
      w[k] = sqrt_eigen_[k] * std::complex<double>(re, im);
    }
    Eigen::FFT<double> fft;
    fft.fwd(x, w);
    const double scale = std::pow(grid_.step, hurst_);
    for (std::size_t j = 0; j < increments_; ++j) out[j] = scale * x[j].real();
    return out;
  }

  SampledPath draw(RandomStream& rng) const {
    SampledPath path(grid_);
    const auto inc = draw_increments(rng);
    double acc = 0.0;
    for (std::size_t j = 0; j < inc.size(); ++j) {
      acc += inc[j];
      path.values[j + 1] = acc;
    }
    return path;
  }

 private:
  bool embed(std::size_t m) {
    std::vector<std::complex<double>> row(m), spectrum(m);
    for (std::size_t j = 0; j <= m / 2; ++j) {
      const double r = fgn_autocovariance(hurst_, static_cast<double>(j));
      row[j] = r;
      if (j > 0 && j < m / 2) row[m - j] = r;
    }
    Eigen::FFT<double> fft;
    fft.fwd(spectrum, row);
    double largest = 0.0;
    for (const auto& s : spectrum) largest = std::max(largest, s.real());
    sqrt_eigen_.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const double ev = spectrum[k].real();
      if (ev < -1e-10 * largest) return false;
      sqrt_eigen_[k] = std::sqrt(std::max(ev, 0.0) / static_cast<double>(m));
    }
    return true;
  }

  double hurst_;
  TimeGrid grid_;
  std::size_t increments_ = 0;
  std::vector<double> sqrt_eigen_;
};

/// Standard FBM path (Var B_H(t) = t^{2H}).
inline SampledPath fbm_path(double hurst, const TimeGrid& grid, RandomStream& rng) {
  return FbmGenerator(hurst, grid).draw(rng);
}

// ---------------------------------------------------------------------------
// Gaussian limit of the centred cumulative ON time

/// Variance function of T~, the Gaussian limit of (T^N - N gamma t) / sqrt(N).
/// Covariances follow from stationary increments:
/// Cov(t, s) = (Var(t) + Var(s) - Var(|t - s|)) / 2.
class TtildeCovariance {
 public:
  enum class Mode { markov_exact, asymptotic_heavy, tabulated };

  /// Exponential ON/OFF periods: eta(u) = gamma (1 - gamma) exp(-r u) with
  /// r = 1/mu_on + 1/mu_off, integrated twice in closed form.
  static TtildeCovariance markov_exact(double mean_on, double mean_off) {
    TtildeCovariance c(Mode::markov_exact);
    c.gamma_ = stationary_on_probability(mean_on, mean_off);
    c.rate_ = 1.0 / mean_on + 1.0 / mean_off;
    return c;
  }

  /// pi^2 t^{2H} c, treating the large-t equivalence as exact.
  static TtildeCovariance asymptotic_heavy(double pi2, double hurst, double c_const) {
    TtildeCovariance c(Mode::asymptotic_heavy);
    c.pi2_ = pi2;
    c.hurst_ = hurst;
    c.c_ = c_const;
    return c;
  }

  static TtildeCovariance asymptotic_heavy(const LimitParams& p) {
    return asymptotic_heavy(p.pi2, p.hurst, p.c);
  }

  /// Experimental: autocovariance eta tabulated at lags 0, step, 2 step, ...
  /// (linearly interpolated, zero beyond the table). Var(t) = 2 int_0^t (t-u) eta(u) du.
  static TtildeCovariance tabulated(std::vector<double> eta, double lag_step) {
    if (eta.empty() || !(lag_step > 0.0)) throw std::invalid_argument("empty autocovariance table");
    TtildeCovariance c(Mode::tabulated);
    c.eta_ = std::move(eta);
    c.lag_step_ = lag_step;
    return c;
  }

  Mode mode() const noexcept { return mode_; }

  double variance(double t) const {
    t = std::abs(t);
    switch (mode_) {
      case Mode::markov_exact: {
        const double rt = rate_ * t;
        return 2.0 * gamma_ * (1.0 - gamma_) * (rt + std::expm1(-rt)) / (rate_ * rate_);
      }
      case Mode::asymptotic_heavy: return pi2_ * std::pow(t, 2.0 * hurst_) * c_;
      case Mode::tabulated: return tabulated_variance(t);
    }
    return 0.0;
  }

  double covariance(double t, double s) const {
    return 0.5 * (variance(t) + variance(s) - variance(t - s));
  }

 private:
  explicit TtildeCovariance(Mode m) : mode_(m) {}

  double eta_at(double u) const {
    const double x = u / lag_step_;
    const double last = static_cast<double>(eta_.size() - 1);
    if (x > last) return 0.0;
    if (x == last) return eta_.back();
    const auto k = static_cast<std::size_t>(x);
    const double f = x - static_cast<double>(k);
    return (1.0 - f) * eta_[k] + f * eta_[k + 1];
  }

  double tabulated_variance(double t) const {
    if (t == 0.0) return 0.0;
    const std::size_t steps = std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(4.0 * t / lag_step_)));
    const double h = t / static_cast<double>(steps);
    double acc = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
      const double u = static_cast<double>(k) * h;
      const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
      acc += w * (t - u) * eta_at(u);
    }
    return 2.0 * h * acc;
  }

  Mode mode_;
  double gamma_ = 0.0;
  double rate_ = 0.0;
  double pi2_ = 0.0;
  double hurst_ = 0.5;
  double c_ = 1.0;
  std::vector<double> eta_;
  double lag_step_ = 1.0;
};

/// Exact multivariate-normal sampler for T~ on a grid (dense factorization
/// of the increment covariance, built once and shared read-only).
class TtildeGenerator {
 public:
  static constexpr std::size_t max_points = 4096;

  TtildeGenerator(const TtildeCovariance& cov, TimeGrid grid) : grid_(grid) {
    if (grid.points > max_points) {
      throw std::invalid_argument("dense T~ sampler is limited to 4096 grid points");
    }
    const std::size_t n = grid.points > 0 ? grid.points - 1 : 0;
    if (n == 0) return;
    // Increments are stationary, so their covariance is Toeplitz in the lag.
    const double h = grid.step;
    std::vector<double> lag_cov(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double kk = static_cast<double>(k);
      lag_cov[k] = 0.5 * (cov.variance((kk + 1.0) * h) + cov.variance(std::abs(kk - 1.0) * h) -
                          2.0 * cov.variance(kk * h));
    }
    Eigen::MatrixXd a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = lag_cov[i > j ? i - j : j - i];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
      scale_ = Eigen::VectorXd::Ones(n);
      return;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const Eigen::VectorXd d = ldlt.vectorD();
    const double largest = std::max(d.maxCoeff(), 0.0);
    if (ldlt.info() != Eigen::Success || d.minCoeff() < -1e-8 * std::max(largest, 1e-300)) {
      throw std::domain_error("T~ covariance is not positive semidefinite");
    }
    factor_ = ldlt.matrixL();
    scale_ = d.cwiseMax(0.0).cwiseSqrt();
    permutation_ = ldlt.transpositionsP();
    pivoted_ = true;
  }

  const TimeGrid& grid() const noexcept { return grid_; }

  SampledPath draw(RandomStream& rng) const {
    SampledPath path(grid_);
    const auto n = static_cast<Eigen::Index>(scale_.size());
    if (n == 0) return path;
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    Eigen::VectorXd inc = factor_.triangularView<Eigen::Lower>() * scale_.cwiseProduct(z);
    if (pivoted_) inc = permutation_.transpose() * inc;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += inc(i);
      path.values[static_cast<std::size_t>(i) + 1] = acc;
    }
    return path;
  }

 private:
  TimeGrid grid_;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd scale_;
  Eigen::Transpositions<Eigen::Dynamic> permutation_;
  bool pivoted_ = false;
};

inline SampledPath ttilde_path(const TtildeCovariance& cov, const TimeGrid& grid, RandomStream& rng) {
  return TtildeGenerator(cov, grid).draw(rng);
}

// ---------------------------------------------------------------------------
// One-sided reflection

struct Reflection {
  SampledPath reflected;  // x + regulator >= 0
  SampledPath regulator;  // sup_{s<=t} max(-x(s), 0)
};

inline Reflection reflect(const SampledPath& path) {
  Reflection out{SampledPath(path.grid), SampledPath(path.grid)};
  double reg = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    reg = std::max(reg, -path.values[k]);
    out.regulator.values[k] = reg;
    out.reflected.values[k] = path.values[k] + reg;
  }
  return out;
}

/// Reflection of a path that moves like Brownian motion with variance rate
/// `variance_rate` between grid points. The running minimum over each step is
/// drawn from the exact Brownian-bridge minimum law given the two endpoints,
///   m = (a + b - sqrt((b - a)^2 - 2 s^2 dt log U)) / 2,
/// so the regulator is not biased low by grid monitoring. A smooth additive
/// component is treated as linear within a step.
inline Reflection reflect_bridged(const SampledPath& path, double variance_rate, RandomStream& rng) {
  if (!(variance_rate >= 0.0)) throw std::invalid_argument("variance rate must be nonnegative");
  Reflection out{SampledPath(path.grid), SampledPath(path.grid)};
  const double spread = 2.0 * variance_rate * path.grid.step;
  double reg = std::max(0.0, -path.values.front());
  out.regulator.values[0] = reg;
  out.reflected.values[0] = path.values[0] + reg;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double a = path.values[k - 1];
    const double b = path.values[k];
    const double d = b - a;
    const double m = 0.5 * (a + b - std::sqrt(d * d - spread * std::log(rng.uniform_open())));
    reg = std::max(reg, -m);
    out.regulator.values[k] = reg;
    out.reflected.values[k] = b + reg;
  }
  return out;
}

/// Discrete complementarity sum_k reflected(k) * (regulator(k) - regulator(k-1)),
/// with regulator(-1) = 0.
inline double complementarity_residual(const Reflection& r) {
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < r.reflected.size(); ++k) {
    acc += r.reflected.values[k] * (r.regulator.values[k] - prev);
    prev = r.regulator.values[k];
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Reflected limit processes

struct LimitDraw {
  SampledPath free;  // driver before reflection
  Reflection reflection;
};

/// Theorem-1 limit: reflect(A~(gamma .) + lambda T~ - S~(lambda gamma .) - theta .)
/// with the three drivers independent.
class LightLimitSimulator {
 public:
  struct Components {
    SampledPath arrivals;  // A~(gamma .), variance rate lambda gamma
    SampledPath ttilde;
    SampledPath service;   // S~(lambda gamma .), variance rate lambda gamma sigma_v^2
  };

  LightLimitSimulator(const LimitParams& params, double lambda, double theta, double service_variance,
                      const TtildeCovariance& cov, TimeGrid grid)
      : gamma_(params.gamma), lambda_(lambda), theta_(theta), service_variance_(service_variance),
        ttilde_(cov, grid) {
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    if (!(lambda >= 0.0) || !(service_variance >= 0.0)) throw std::invalid_argument("negative rate");
  }

  const TimeGrid& grid() const noexcept { return ttilde_.grid(); }

  Components draw_components(RandomStream& rng) const {
    Components c;
    c.arrivals = bm_path(lambda_ * gamma_, grid(), rng);
    c.ttilde = ttilde_.draw(rng);
    c.service = bm_path(lambda_ * gamma_ * service_variance_, grid(), rng);
    return c;
  }

  /// Variance of the free driver at t.
  double free_variance(double t, const TtildeCovariance& cov) const {
    return lambda_ * gamma_ * t + lambda_ * lambda_ * cov.variance(t) +
           lambda_ * gamma_ * service_variance_ * t;
  }

  LimitDraw draw(RandomStream& rng) const {
    const auto c = draw_components(rng);
    SampledPath x(grid());
    for (std::size_t k = 0; k < x.size(); ++k) {
      x.values[k] = c.arrivals.values[k] + lambda_ * c.ttilde.values[k] - c.service.values[k] -
                    theta_ * grid().time(k);
    }
    auto r = reflect_bridged(x, lambda_ * gamma_ * (1.0 + service_variance_), rng);
    return {std::move(x), std::move(r)};
  }

 private:
  double gamma_;
  double lambda_;
  double theta_;
  double service_variance_;
  TtildeGenerator ttilde_;
};

inline LimitDraw limit_Q_light(const LimitParams& params, double lambda, double theta,
                               double service_variance, const TtildeCovariance& cov,
                               const TimeGrid& grid, RandomStream& rng) {
  return LightLimitSimulator(params, lambda, theta, service_variance, cov, grid).draw(rng);
}

/// Theorem-2 limit: reflect(lambda pi B_H - theta .).
class HeavyLimitSimulator {
 public:
  HeavyLimitSimulator(const LimitParams& params, double lambda, double theta, TimeGrid grid)
      : amplitude_(lambda * params.pi()), theta_(theta), fbm_(checked_hurst(params), grid) {
    if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
  }

  const TimeGrid& grid() const noexcept { return fbm_.grid(); }
  double amplitude() const noexcept { return amplitude_; }

  LimitDraw draw(RandomStream& rng) const {
    SampledPath x = fbm_.draw(rng);
    for (std::size_t k = 0; k < x.size(); ++k) {
      x.values[k] = amplitude_ * x.values[k] - theta_ * grid().time(k);
    }
    auto r = reflect(x);
    return {std::move(x), std::move(r)};
  }

 private:
  static double checked_hurst(const LimitParams& p) {
    if (!p.long_range_dependent()) {
      throw RegimeError("reflected FBM limit requires alpha_min < 2");
    }
    return p.hurst;
  }

  double amplitude_;
  double theta_;
  FbmGenerator fbm_;
};

inline LimitDraw limit_Q_heavy(const LimitParams& params, double theta, double lambda,
                               const TimeGrid& grid, RandomStream& rng) {
  return HeavyLimitSimulator(params, lambda, theta, grid).draw(rng);
}

// ---------------------------------------------------------------------------

/// Experimental: estimate the stationary autocovariance eta(u) of one
/// source's ON indicator at lags 0, step, ..., (lags-1) step by simulating
/// `sources` independent stationary sources over `horizon`.
inline std::vector<double> estimate_on_autocovariance(const PeriodDistribution& on,
                                                      const PeriodDistribution& off, double step,
                                                      std::size_t lags, std::size_t sources,
                                                      double horizon, RandomStream& rng) {
  const double gamma = stationary_on_probability(on.mean(), off.mean());
  const auto samples = static_cast<std::size_t>(horizon / step);
  if (samples <= lags) throw std::invalid_argument("horizon too short for the requested lags");
  std::vector<double> eta(lags, 0.0);
  std::vector<double> w(samples);
  for (std::size_t n = 0; n < sources; ++n) {
    const auto path = simulate_source(on, off, horizon, rng);
    for (std::size_t k = 0; k < samples; ++k) w[k] = path.state(static_cast<double>(k) * step) - gamma;
    for (std::size_t l = 0; l < lags; ++l) {
      double acc = 0.0;
      for (std::size_t k = 0; k + l < samples; ++k) acc += w[k] * w[k + l];
      eta[l] += acc / static_cast<double>(samples - l);
    }
  }
  for (auto& e : eta) e /= static_cast<double>(sources);
  return eta;
}

}  // namespace onoff
