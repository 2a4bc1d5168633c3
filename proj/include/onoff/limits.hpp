#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "onoff/distributions.hpp"
#include "onoff/errors.hpp"
#include "onoff/grid.hpp"
#include "onoff/queue.hpp"
#include "onoff/sources.hpp"

namespace onoff {

/// Constants of the heavy-traffic limits derived from the ON and OFF laws.
///
/// With constant slowly varying parts c_1, c_2 the tail ratio is
/// b = c_1 / c_2 when the tail indices agree, infinity when the ON tail is
/// heavier and 0 when the OFF tail is heavier. The variance constant pi^2
/// uses the two-term formula when 0 < b < inf and the single-term formula
/// with the heavier ("min") index otherwise.
struct LimitParams {
  double mean_on = 1.0;
  double mean_off = 1.0;
  double gamma = 0.5;
  double alpha_on = 2.0;
  double alpha_off = 2.0;
  double a_on = 0.0;
  double a_off = 0.0;
  double b = 1.0;
  double alpha_min = 2.0;
  int min_index = 0;  // 1 (ON) or 2 (OFF) in the single-term branch; 0 otherwise
  int max_index = 0;
  double pi2 = 0.0;
  double hurst = 0.5;
  double c = 1.0;        // constant value of the slowly varying L
  int tail_index_ref = 2;  // F̄_L is the ON (1) or OFF (2) tail
  PeriodDistribution tail_reference = PeriodDistribution::exponential(1.0);

  bool two_term() const noexcept { return b > 0.0 && std::isfinite(b); }
  bool long_range_dependent() const noexcept { return alpha_min < 2.0; }
  double pi() const noexcept { return std::sqrt(pi2); }
};

inline LimitParams limit_params(const PeriodDistribution& on, const PeriodDistribution& off) {
  LimitParams p;
  p.mean_on = on.mean();
  p.mean_off = off.mean();
  p.gamma = stationary_on_probability(p.mean_on, p.mean_off);
  p.alpha_on = on.tail_index();
  p.alpha_off = off.tail_index();
  p.a_on = tail_constant(on);
  p.a_off = tail_constant(off);

  const double mu1 = p.mean_on;
  const double mu2 = p.mean_off;
  const double sum3 = std::pow(mu1 + mu2, 3);

  if (p.alpha_on == p.alpha_off) {
    p.b = on.tail_constant_c() / off.tail_constant_c();
  } else {
    p.b = p.alpha_on < p.alpha_off ? std::numeric_limits<double>::infinity() : 0.0;
  }

  if (p.two_term()) {
    p.alpha_min = p.alpha_on;
    p.pi2 = 2.0 * (mu2 * mu2 * p.a_on * p.b + mu1 * mu1 * p.a_off) /
            (sum3 * std::tgamma(4.0 - p.alpha_min));
    p.tail_index_ref = 2;
    p.c = off.tail_constant_c();
    p.tail_reference = off;
  } else {
    const bool on_heavier = std::isinf(p.b);
    p.min_index = on_heavier ? 1 : 2;
    p.max_index = on_heavier ? 2 : 1;
    p.alpha_min = on_heavier ? p.alpha_on : p.alpha_off;
    const double mu_max = on_heavier ? mu2 : mu1;
    const double a_min = on_heavier ? p.a_on : p.a_off;
    p.pi2 = 2.0 * mu_max * mu_max * a_min / (sum3 * std::tgamma(4.0 - p.alpha_min));
    p.tail_index_ref = p.min_index;
    p.c = (on_heavier ? on : off).tail_constant_c();
    p.tail_reference = on_heavier ? on : off;
  }
  p.hurst = (3.0 - p.alpha_min) / 2.0;
  return p;
}

namespace detail {
inline void require_heavy(const LimitParams& p, const char* what) {
  if (!p.long_range_dependent()) {
    throw RegimeError(std::string(what) + " requires an infinite-variance period (alpha_min < 2)");
  }
}
}  // namespace detail

/// Heavy-traffic service rate under R-scaling: N lambda gamma + theta (N R^{1-alpha_min} c)^{1/2}.
inline double service_rate_R(const QueueConfig& cfg, const LimitParams& params) {
  if (cfg.regime != Regime::r_scaling) throw RegimeError("service_rate_R needs R-scaling");
  detail::require_heavy(params, "service_rate_R");
  const double n = static_cast<double>(cfg.sources);
  return n * cfg.lambda * params.gamma +
         cfg.theta * std::sqrt(n * std::pow(cfg.time_scale, 1.0 - params.alpha_min) * params.c);
}

/// d_R = (N R^{3-alpha_min} c)^{1/2}.
inline double normalizer_dR(double n, double r, const LimitParams& params) {
  detail::require_heavy(params, "normalizer_dR");
  return std::sqrt(n * std::pow(r, 3.0 - params.alpha_min) * params.c);
}

struct FastGrowthChoice {
  std::size_t sources = 0;
  double growth_value = 0.0;  // N R F̄_L(R)
};

/// N = ceil(kappa R^{alpha_min - 1 + eps}), so that N R F̄_L(R) grows like
/// R^{1+eps}.
inline FastGrowthChoice choose_N_fast_growth(double r, const LimitParams& params,
                                             double epsilon = 0.5, double kappa = 1.0) {
  detail::require_heavy(params, "choose_N_fast_growth");
  if (!(epsilon > 0.0) || !(kappa > 0.0)) {
    throw ConfigError("fast_growth", "epsilon and kappa must be positive");
  }
  const double raw = kappa * std::pow(r, params.alpha_min - 1.0 + epsilon);
  // Guard against pow() landing one ulp above an exact integer.
  const double n = std::ceil(raw * (1.0 - 4 * std::numeric_limits<double>::epsilon()));
  FastGrowthChoice out;
  out.sources = static_cast<std::size_t>(std::max(1.0, n));
  out.growth_value = static_cast<double>(out.sources) * r * params.tail_reference.complementary_cdf(r);
  return out;
}

struct ScaledPaths {
  SampledPath queue;
  SampledPath workload;
};

/// Q~ = Q / sqrt(N), L~ = (mu / sqrt(N)) L on the trace grid.
inline ScaledPaths scale_N(const QueueTrace& trace, std::size_t n, double mu) {
  const double root = std::sqrt(static_cast<double>(n));
  ScaledPaths out{SampledPath(trace.grid), SampledPath(trace.grid)};
  const double lf = mu / root;
  for (std::size_t k = 0; k < trace.grid.points; ++k) {
    out.queue.values[k] = static_cast<double>(trace.queue_length[k]) / root;
    out.workload.values[k] = lf * trace.workload[k];
  }
  return out;
}

/// Inverse of scale_N. Queue lengths are integers and come back exactly;
/// workloads come back to within rounding of the two scale factors.
inline std::pair<std::vector<std::size_t>, std::vector<double>> unscale_N(const ScaledPaths& s,
                                                                          std::size_t n, double mu) {
  const double root = std::sqrt(static_cast<double>(n));
  const double lf = mu / root;
  std::pair<std::vector<std::size_t>, std::vector<double>> out;
  out.first.reserve(s.queue.size());
  out.second.reserve(s.workload.size());
  for (double q : s.queue.values) out.first.push_back(static_cast<std::size_t>(std::llround(q * root)));
  for (double l : s.workload.values) out.second.push_back(l / lf);
  return out;
}

/// Q~^R(s) = Q^N(R s) / d_R and L~^R(s) = (mu / d_R) L^N(R s) on `scaled`.
/// Every R * scaled.time(k) must be a grid point of the trace.
inline ScaledPaths scale_R(const QueueTrace& trace, double r, double mu, double d_r,
                           const TimeGrid& scaled) {
  if (r * scaled.last() > trace.end() * (1.0 + 1e-12)) {
    throw std::invalid_argument("trace horizon shorter than R times the scaled horizon");
  }
  const double ratio = r * scaled.step / trace.grid.step;
  const auto stride = static_cast<std::size_t>(std::llround(ratio));
  if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio) {
    throw std::invalid_argument("scaled grid does not align with the trace grid");
  }
  ScaledPaths out{SampledPath(scaled), SampledPath(scaled)};
  const double lf = mu / d_r;
  for (std::size_t k = 0; k < scaled.points; ++k) {
    const std::size_t j = k * stride;
    out.queue.values[k] = static_cast<double>(trace.queue_length[j]) / d_r;
    out.workload.values[k] = lf * trace.workload[j];
  }
  return out;
}

struct UvDiagnostic {
  double u = 0.0;  // T^{1 - alpha_min/2} c^{1/2}
  double v = 0.0;  // T^{alpha_min/2 - 1/2} / c^{1/2}
};

/// Both normalizers diverge as T grows whenever 1 < alpha_min < 2.
inline UvDiagnostic uv_diagnostic(double t, const LimitParams& params) {
  detail::require_heavy(params, "uv_diagnostic");
  const double a = params.alpha_min;
  const double rc = std::sqrt(params.c);
  return {std::pow(t, 1.0 - a / 2.0) * rc, std::pow(t, a / 2.0 - 0.5) / rc};
}

}  // namespace onoff
