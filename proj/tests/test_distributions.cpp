#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "onoff/distributions.hpp"
#include "onoff/errors.hpp"
#include "onoff/random.hpp"

using namespace onoff;

namespace {

double sample_mean(const PeriodDistribution& d, bool residual, std::size_t n, std::uint64_t seed) {
  auto rng = derive_stream(seed, {"dist-test"});
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += residual ? sample_equilibrium_residual(d, rng) : sample_period(d, rng);
  return s / static_cast<double>(n);
}

// Composite Simpson rule; used as an oracle independent of the closed forms.
template <typename F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST(PeriodSampling, ExponentialMean) {
  EXPECT_NEAR(sample_mean(PeriodDistribution::exponential(2.0), false, 1000000, 1), 2.0, 0.01);
}

TEST(PeriodSampling, ParetoScaleAndMean) {
  const auto p = PeriodDistribution::pareto(1.5, 1.0);
  EXPECT_DOUBLE_EQ(p.scale(), 1.0 / 3.0);
  // infinite variance: the sample mean converges slowly, so the band is wide
  EXPECT_NEAR(sample_mean(p, false, 1000000, 2), 1.0, 0.03);
}

TEST(PeriodSampling, DeterministicIsConstant) {
  const auto d = PeriodDistribution::deterministic(3.0);
  auto rng = derive_stream(1, {"det"});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_period(d, rng), 3.0);
}

TEST(PeriodSampling, UniformMoments) {
  const auto u = PeriodDistribution::uniform(1.0, 3.0);
  EXPECT_DOUBLE_EQ(u.mean(), 2.0);
  EXPECT_NEAR(u.variance(), 4.0 / 12.0, 1e-15);
  EXPECT_NEAR(sample_mean(u, false, 200000, 3), 2.0, 0.01);
}

TEST(ResidualSampling, ExponentialIsMemoryless) {
  EXPECT_NEAR(sample_mean(PeriodDistribution::exponential(2.0), true, 1000000, 4), 2.0, 0.01);
}

TEST(ResidualSampling, DeterministicResidualIsUniform) {
  EXPECT_NEAR(sample_mean(PeriodDistribution::deterministic(3.0), true, 1000000, 5), 1.5, 0.01);
}

TEST(ResidualSampling, UniformResidualMean) {
  // E[residual] = E[X^2] / (2 E[X]) = (4 + 1/3) / 4
  EXPECT_NEAR(sample_mean(PeriodDistribution::uniform(1.0, 3.0), true, 400000, 6), 13.0 / 12.0, 0.01);
}

TEST(ResidualSampling, ParetoEquilibriumCdfMatchesQuadrature) {
  const auto p = PeriodDistribution::pareto(1.5, 1.0);
  for (double x : {0.5, 1.0, 2.0}) {
    const double oracle = simpson([&](double u) { return p.complementary_cdf(u); }, 0.0, x) / p.mean();
    EXPECT_NEAR(p.equilibrium_cdf(x), oracle, 1e-6) << "x=" << x;
  }
  auto rng = derive_stream(7, {"eq"});
  const int n = 200000;
  int below[3] = {0, 0, 0};
  const double xs[3] = {0.5, 1.0, 2.0};
  for (int i = 0; i < n; ++i) {
    const double r = sample_equilibrium_residual(p, rng);
    for (int j = 0; j < 3; ++j) below[j] += r <= xs[j];
  }
  for (int j = 0; j < 3; ++j) {
    const double oracle = simpson([&](double u) { return p.complementary_cdf(u); }, 0.0, xs[j]) / p.mean();
    EXPECT_NEAR(static_cast<double>(below[j]) / n, oracle, 0.005);
  }
}

TEST(ResidualSampling, QuantileInvertsCdf) {
  for (const auto& d : {PeriodDistribution::pareto(1.3, 2.0), PeriodDistribution::exponential(0.7),
                        PeriodDistribution::uniform(0.5, 4.0), PeriodDistribution::deterministic(2.0)}) {
    for (double p : {0.01, 0.2, 0.5, 0.9, 0.999}) {
      EXPECT_NEAR(d.equilibrium_cdf(d.equilibrium_quantile(p)), p, 1e-10) << d.describe();
    }
  }
}

TEST(TailConstant, ParetoUsesGammaFunction) {
  EXPECT_NEAR(tail_constant(PeriodDistribution::pareto(1.5, 1.0)), 2.0 * std::sqrt(std::numbers::pi), 1e-12);
  // Gamma(0.7)/0.3 from tabulated Gamma(0.7) = 1.298055332647558
  EXPECT_NEAR(tail_constant(PeriodDistribution::pareto(1.3, 1.0)), 1.298055332647558 / 0.3, 1e-12);
}

TEST(TailConstant, LightTailsUseHalfVariance) {
  EXPECT_DOUBLE_EQ(tail_constant(PeriodDistribution::exponential(1.0)), 0.5);
  EXPECT_DOUBLE_EQ(tail_constant(PeriodDistribution::deterministic(3.0)), 0.0);
  EXPECT_NEAR(tail_constant(PeriodDistribution::uniform(1.0, 3.0)), 1.0 / 6.0, 1e-15);
}

TEST(ComplementaryCdf, Examples) {
  EXPECT_NEAR(complementary_cdf(PeriodDistribution::exponential(2.0), 2.0), std::exp(-1.0), 1e-15);
  const auto p = PeriodDistribution::pareto(1.5, 1.0);
  EXPECT_NEAR(complementary_cdf(p, 1.0), std::pow(1.0 / 3.0, 1.5), 1e-12);
  for (const auto& d : {p, PeriodDistribution::exponential(1.0), PeriodDistribution::uniform(1, 2),
                        PeriodDistribution::deterministic(3)}) {
    EXPECT_EQ(complementary_cdf(d, 0.0), 1.0);
  }
}

TEST(ComplementaryCdf, ParetoEmpiricalTail) {
  const auto p = PeriodDistribution::pareto(1.5, 1.0);
  auto rng = derive_stream(11, {"tail"});
  int above = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) above += sample_period(p, rng) > 1.0;
  EXPECT_NEAR(static_cast<double>(above) / n, 0.19245, 0.002);
}

TEST(ComplementaryCdf, NonIncreasingInX) {
  for (const auto& d : {PeriodDistribution::pareto(1.5, 1.0), PeriodDistribution::exponential(1.0),
                        PeriodDistribution::uniform(1, 2), PeriodDistribution::deterministic(3)}) {
    double prev = 1.0;
    for (double x = 0.0; x < 10.0; x += 0.01) {
      const double v = d.complementary_cdf(x);
      EXPECT_LE(v, prev);
      EXPECT_GE(v, 0.0);
      prev = v;
    }
  }
}

TEST(PeriodDistribution, RejectsBadParameters) {
  EXPECT_THROW(PeriodDistribution::pareto(2.5, 1.0), ConfigError);
  EXPECT_THROW(PeriodDistribution::pareto(1.0, 1.0), ConfigError);
  EXPECT_THROW(PeriodDistribution::exponential(0.0), ConfigError);
  EXPECT_THROW(PeriodDistribution::uniform(2.0, 1.0), ConfigError);
  EXPECT_THROW(PeriodDistribution::deterministic(-1.0), ConfigError);
}

TEST(ServiceDistribution, UnitMeanAndVariance) {
  const ServiceDistribution laws[] = {ServiceDistribution::deterministic(), ServiceDistribution::exponential(),
                                      ServiceDistribution::two_point(0.5, 3.0)};
  const double variances[] = {0.0, 1.0, (1.0 - 0.5) * (3.0 - 1.0)};
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(laws[j].variance(), variances[j], 1e-12);
    auto rng = derive_stream(12, {"svc", j});
    double s = 0.0, s2 = 0.0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
      const double v = laws[j].sample(rng);
      s += v;
      s2 += v * v;
    }
    const double mean = s / n;
    EXPECT_NEAR(mean, 1.0, 0.01);
    EXPECT_NEAR(s2 / n - mean * mean, variances[j], 0.03);
  }
  EXPECT_THROW(ServiceDistribution::two_point(1.5, 3.0), ConfigError);
}
