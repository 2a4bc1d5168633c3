#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

#include "onoff/errors.hpp"
#include "onoff/random.hpp"

namespace onoff {

/// Law of an ON or OFF period length.
///
/// Heavy tails are Pareto with shape alpha in (1, 2): infinite variance and
/// a tail that is exactly c * x^-alpha beyond the cutoff, so the slowly
/// varying part of the tail is the constant c = x_m^alpha. The light-tailed
/// kinds carry tail index 2 and tail constant 1.
///
/// All parameters are fixed at construction; instances are immutable and
/// may be shared between threads.
class PeriodDistribution {
 public:
  enum class Kind { pareto, exponential, uniform_positive, deterministic };

  static PeriodDistribution pareto(double alpha, double mean) {
    if (!(alpha > 1.0 && alpha < 2.0)) {
      throw ConfigError("alpha", "pareto shape must lie strictly in (1, 2)");
    }
    require_positive_finite("mean", mean);
    return PeriodDistribution(Kind::pareto, alpha, (alpha - 1.0) / alpha * mean, mean);
  }

  static PeriodDistribution exponential(double mean) {
    require_positive_finite("mean", mean);
    return PeriodDistribution(Kind::exponential, 2.0, mean, mean);
  }

  /// Uniform on (low, high) with 0 <= low < high.
  static PeriodDistribution uniform(double low, double high) {
    if (!(low >= 0.0 && high > low && std::isfinite(high))) {
      throw ConfigError("high", "uniform periods need 0 <= low < high");
    }
    return PeriodDistribution(Kind::uniform_positive, low, high, 0.5 * (low + high));
  }

  static PeriodDistribution deterministic(double value) {
    require_positive_finite("value", value);
    return PeriodDistribution(Kind::deterministic, value, value, value);
  }

  Kind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }

  double variance() const noexcept {
    switch (kind_) {
      case Kind::pareto: return std::numeric_limits<double>::infinity();
      case Kind::exponential: return mean_ * mean_;
      case Kind::uniform_positive: return (p2_ - p1_) * (p2_ - p1_) / 12.0;
      case Kind::deterministic: return 0.0;
    }
    return 0.0;
  }

  bool heavy_tailed() const noexcept { return kind_ == Kind::pareto; }

  /// Tail index; 2 for every finite-variance kind.
  double tail_index() const noexcept { return kind_ == Kind::pareto ? p1_ : 2.0; }

  /// Constant slowly varying factor of the tail; 1 for finite-variance kinds.
  double tail_constant_c() const noexcept {
    return kind_ == Kind::pareto ? std::pow(p2_, p1_) : 1.0;
  }

  /// Pareto cutoff x_m. Zero for other kinds.
  double scale() const noexcept { return kind_ == Kind::pareto ? p2_ : 0.0; }

  /// Uniform bounds (only meaningful for uniform_positive).
  double low() const noexcept { return p1_; }
  double high() const noexcept { return p2_; }

  /// Absolutely continuous with a density bounded near zero. Deterministic
  /// periods fail this and are reserved for heavy-regime use.
  bool regular_near_zero() const noexcept { return kind_ != Kind::deterministic; }

  double complementary_cdf(double x) const noexcept {
    if (x <= 0.0) return 1.0;
    switch (kind_) {
      case Kind::pareto: return x < p2_ ? 1.0 : std::pow(p2_ / x, p1_);
      case Kind::exponential: return std::exp(-x / mean_);
      case Kind::uniform_positive:
        if (x <= p1_) return 1.0;
        if (x >= p2_) return 0.0;
        return (p2_ - x) / (p2_ - p1_);
      case Kind::deterministic: return x < p1_ ? 1.0 : 0.0;
    }
    return 0.0;
  }

  /// Inverse of the complementary CDF at tail probability q in (0, 1).
  double tail_quantile(double q) const noexcept {
    switch (kind_) {
      case Kind::pareto: return p2_ * std::pow(q, -1.0 / p1_);
      case Kind::exponential: return -mean_ * std::log(q);
      case Kind::uniform_positive: return p2_ - q * (p2_ - p1_);
      case Kind::deterministic: return p1_;
    }
    return 0.0;
  }

  /// CDF of the equilibrium (integrated-tail) law (1/mean) * int_0^x Fbar.
  double equilibrium_cdf(double x) const noexcept {
    if (x <= 0.0) return 0.0;
    switch (kind_) {
      case Kind::pareto:
        if (x < p2_) return x / mean_;
        return 1.0 - std::pow(p2_ / x, p1_ - 1.0) / p1_;
      case Kind::exponential: return -std::expm1(-x / mean_);
      case Kind::uniform_positive: {
        if (x <= p1_) return x / mean_;
        if (x >= p2_) return 1.0;
        const double y = x - p1_;
        return (p1_ + y - y * y / (2.0 * (p2_ - p1_))) / mean_;
      }
      case Kind::deterministic: return x >= p1_ ? 1.0 : x / p1_;
    }
    return 0.0;
  }

  /// Inverse of equilibrium_cdf at probability p in (0, 1).
  double equilibrium_quantile(double p) const noexcept {
    switch (kind_) {
      case Kind::pareto: {
        const double knee = (p1_ - 1.0) / p1_;
        if (p < knee) return p * mean_;
        return p2_ * std::pow(p1_ * (1.0 - p), -1.0 / (p1_ - 1.0));
      }
      case Kind::exponential: return -mean_ * std::log1p(-p);
      case Kind::uniform_positive: {
        const double target = p * mean_;
        if (target <= p1_) return target;
        // Solve y - y^2 / (2w) = k for the root in [0, w].
        const double w = p2_ - p1_;
        const double k = target - p1_;
        const double disc = std::max(0.0, 1.0 - 2.0 * k / w);
        return p1_ + 2.0 * k / (1.0 + std::sqrt(disc));
      }
      case Kind::deterministic: return p * p1_;
    }
    return 0.0;
  }

  std::string describe() const;

 private:
  PeriodDistribution(Kind kind, double p1, double p2, double mean)
      : kind_(kind), p1_(p1), p2_(p2), mean_(mean) {}

  static void require_positive_finite(const char* key, double v) {
    if (!(v > 0.0 && std::isfinite(v))) {
      throw ConfigError(key, "must be positive and finite");
    }
  }

  Kind kind_;
  // pareto: (alpha, x_m); uniform: (low, high); deterministic: (value, value);
  // exponential: (2, mean).
  double p1_;
  double p2_;
  double mean_;
};

/// Draw one period length by inverse-CDF sampling.
inline double sample_period(const PeriodDistribution& dist, RandomStream& rng) {
  return dist.tail_quantile(rng.uniform_open());
}

/// Draw from the equilibrium residual-life law, used to start a renewal
/// process in stationarity.
inline double sample_equilibrium_residual(const PeriodDistribution& dist, RandomStream& rng) {
  return dist.equilibrium_quantile(rng.uniform_open());
}

inline double complementary_cdf(const PeriodDistribution& dist, double x) {
  return dist.complementary_cdf(x);
}

/// a_i: Gamma(2 - alpha) / (alpha - 1) for an infinite-variance tail,
/// sigma^2 / 2 otherwise.
inline double tail_constant(const PeriodDistribution& dist) {
  if (dist.heavy_tailed()) {
    const double alpha = dist.tail_index();
    return std::tgamma(2.0 - alpha) / (alpha - 1.0);
  }
  return 0.5 * dist.variance();
}

inline std::string to_string(PeriodDistribution::Kind kind) {
  switch (kind) {
    case PeriodDistribution::Kind::pareto: return "pareto";
    case PeriodDistribution::Kind::exponential: return "exponential";
    case PeriodDistribution::Kind::uniform_positive: return "uniform";
    case PeriodDistribution::Kind::deterministic: return "deterministic";
  }
  return "?";
}

inline std::string PeriodDistribution::describe() const {
  std::ostringstream out;
  out << to_string(kind_) << '(';
  switch (kind_) {
    case Kind::pareto: out << "alpha=" << p1_ << ", mean=" << mean_; break;
    case Kind::uniform_positive: out << p1_ << ", " << p2_; break;
    default: out << "mean=" << mean_;
  }
  out << ')';
  return out.str();
}

/// Unit-mean packet work v(i). The per-packet service time at rate mu is
/// v(i) / mu.
class ServiceDistribution {
 public:
  enum class Kind { deterministic, exponential, two_point };

  static ServiceDistribution deterministic() { return {Kind::deterministic, 1.0, 1.0}; }
  static ServiceDistribution exponential() { return {Kind::exponential, 1.0, 1.0}; }

  /// Takes `low` or `high` with the probabilities that make the mean 1.
  static ServiceDistribution two_point(double low, double high) {
    if (!(low > 0.0 && low < 1.0 && high > 1.0 && std::isfinite(high))) {
      throw ConfigError("service", "two-point service needs 0 < low < 1 < high");
    }
    return {Kind::two_point, low, high};
  }

  Kind kind() const noexcept { return kind_; }
  static constexpr double mean() noexcept { return 1.0; }

  double variance() const noexcept {
    switch (kind_) {
      case Kind::deterministic: return 0.0;
      case Kind::exponential: return 1.0;
      case Kind::two_point: return (1.0 - low_) * (high_ - 1.0);
    }
    return 0.0;
  }

  /// Probability of the high value in the two-point law.
  double high_probability() const noexcept { return (1.0 - low_) / (high_ - low_); }
  double low() const noexcept { return low_; }
  double high() const noexcept { return high_; }

  double sample(RandomStream& rng) const noexcept {
    switch (kind_) {
      case Kind::deterministic: return 1.0;
      case Kind::exponential: return -std::log(rng.uniform_open());
      case Kind::two_point: return rng.uniform_open() < high_probability() ? high_ : low_;
    }
    return 1.0;
  }

 private:
  ServiceDistribution(Kind kind, double low, double high)
      : kind_(kind), low_(low), high_(high) {}

  Kind kind_;
  double low_;
  double high_;
};

inline std::string to_string(ServiceDistribution::Kind kind) {
  switch (kind) {
    case ServiceDistribution::Kind::deterministic: return "deterministic";
    case ServiceDistribution::Kind::exponential: return "exponential";
    case ServiceDistribution::Kind::two_point: return "two-point";
  }
  return "?";
}

}  // namespace onoff
