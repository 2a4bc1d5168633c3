#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "onoff/distributions.hpp"
#include "onoff/random.hpp"
#include "onoff/sources.hpp"
#include "onoff/stats.hpp"

using namespace onoff;

namespace {
const auto kExp1 = PeriodDistribution::exponential(1.0);
}

TEST(StationaryOnProbability, Examples) {
  EXPECT_DOUBLE_EQ(stationary_on_probability(2.0, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(stationary_on_probability(1.0, 3.0), 0.25);
  EXPECT_THROW(stationary_on_probability(2.0, 0.0), std::invalid_argument);
}

TEST(SimulateSource, LongRunOnFraction) {
  auto rng = derive_stream(1, {"frac"});
  const auto path = simulate_source(kExp1, kExp1, 1e5, rng);
  EXPECT_NEAR(path.cumulative_on_time(1e5) / 1e5, 0.5, 0.005);
}

TEST(SimulateSource, StationaryAtStartAndLater) {
  const auto off = PeriodDistribution::exponential(3.0);
  auto rng = derive_stream(2, {"stationary"});
  int on0 = 0, on50 = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto p = simulate_source(kExp1, off, 60.0, rng);
    on0 += p.state(0.0);
    on50 += p.state(50.0);
  }
  EXPECT_NEAR(static_cast<double>(on0) / n, 0.25, 0.01);
  EXPECT_NEAR(static_cast<double>(on50) / n, 0.25, 0.01);
}

TEST(SimulateSource, HeavyTailedSourceStationaryOnProbability) {
  // gamma = 1/(1+2); the equilibrium start makes P(ON) flat in t.
  const auto on = PeriodDistribution::pareto(1.5, 1.0);
  const auto off = PeriodDistribution::pareto(1.5, 2.0);
  auto rng = derive_stream(3, {"heavy-stationary"});
  int at0 = 0, at7 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto p = simulate_source(on, off, 8.0, rng);
    at0 += p.state(0.0);
    at7 += p.state(7.0);
  }
  EXPECT_NEAR(static_cast<double>(at0) / n, 1.0 / 3.0, 0.012);
  EXPECT_NEAR(static_cast<double>(at7) / n, 1.0 / 3.0, 0.012);
}

TEST(SimulateSource, ZeroHorizon) {
  auto rng = derive_stream(4, {"zero"});
  const auto p = simulate_source(kExp1, kExp1, 0.0, rng);
  EXPECT_TRUE(p.epochs().empty());
  EXPECT_EQ(p.cumulative_on_time(0.0), 0.0);
}

TEST(SimulateSource, EpochsStrictlyIncreasingInsideHorizon) {
  auto rng = derive_stream(5, {"epochs"});
  for (int i = 0; i < 100; ++i) {
    const auto p = simulate_source(PeriodDistribution::pareto(1.2, 1.0), kExp1, 50.0, rng);
    double prev = 0.0;
    for (double e : p.epochs()) {
      EXPECT_GT(e, prev);
      EXPECT_LE(e, 50.0);
      prev = e;
    }
  }
}

TEST(CumulativeOnTime, HandBuiltPaths) {
  const BinarySourcePath always_on(Phase::on, {}, 5.0);
  EXPECT_DOUBLE_EQ(cumulative_on_time(always_on, 3.0), 3.0);
  const BinarySourcePath p(Phase::on, {1.0, 2.0}, 3.0);
  EXPECT_DOUBLE_EQ(cumulative_on_time(p, 2.5), 1.5);
  EXPECT_EQ(p.state(0.5), 1);
  EXPECT_EQ(p.state(1.0), 0);
  EXPECT_EQ(p.state(2.0), 1);
  EXPECT_THROW(BinarySourcePath(Phase::on, {2.0, 1.0}, 3.0), std::invalid_argument);
}

TEST(CumulativeOnTime, MatchesTrapezoidOfIndicator) {
  auto rng = derive_stream(6, {"trap"});
  const auto p = simulate_source(kExp1, kExp1, 20.0, rng);
  const double h = 1e-3;
  double acc = 0.0;
  double prev = p.state(0.0);
  for (int k = 1; k <= 20000; ++k) {
    const double cur = p.state(k * h);
    acc += 0.5 * (prev + cur) * h;
    prev = cur;
    if (k % 1000 == 0) EXPECT_NEAR(p.cumulative_on_time(k * h), acc, 1e-3 * (1 + p.epochs().size()));
  }
}

TEST(CumulativeOnTime, LipschitzAndNondecreasing) {
  auto rng = derive_stream(7, {"lip"});
  const auto p = simulate_source(PeriodDistribution::pareto(1.5, 1.0), kExp1, 30.0, rng);
  double prev = 0.0;
  for (double t = 0.01; t <= 30.0; t += 0.01) {
    const double v = p.cumulative_on_time(t);
    EXPECT_GE(v, prev - 1e-12);
    EXPECT_LE(v - prev, 0.01 + 1e-9);
    prev = v;
  }
}

TEST(Superpose, IdenticalAlwaysOnPaths) {
  const std::vector<BinarySourcePath> paths{BinarySourcePath(Phase::on, {}, 4.0),
                                            BinarySourcePath(Phase::on, {}, 4.0)};
  const auto s = superpose(paths);
  for (double t : {0.0, 1.0, 3.9}) EXPECT_EQ(s.level(t), 2);
  EXPECT_DOUBLE_EQ(s.cumulative_on_time(4.0), 8.0);
}

TEST(Superpose, AdditiveInCumulativeOnTime) {
  auto rng = derive_stream(8, {"add"});
  std::vector<BinarySourcePath> paths;
  for (int i = 0; i < 25; ++i) paths.push_back(simulate_source(kExp1, kExp1, 10.0, rng));
  const auto s = superpose(paths);
  auto trng = derive_stream(8, {"times"});
  for (int i = 0; i < 100; ++i) {
    const double t = 10.0 * trng.uniform_open();
    double sum = 0.0;
    int level = 0;
    for (const auto& p : paths) {
      sum += p.cumulative_on_time(t);
      level += p.state(t);
    }
    EXPECT_NEAR(s.cumulative_on_time(t), sum, 1e-9);
    EXPECT_EQ(s.level(t), level);
  }
}

TEST(Superpose, LawOfLargeNumbers) {
  auto rng = derive_stream(9, {"lln"});
  std::vector<BinarySourcePath> paths;
  for (int i = 0; i < 1000; ++i) paths.push_back(simulate_source(kExp1, kExp1, 1000.0, rng));
  EXPECT_NEAR(superpose(paths).cumulative_on_time(1000.0) / (1000.0 * 1000.0), 0.5, 0.01);
}

TEST(Superpose, RejectsMismatchedHorizons) {
  const std::vector<BinarySourcePath> paths{BinarySourcePath(Phase::on, {}, 4.0),
                                            BinarySourcePath(Phase::on, {}, 5.0)};
  EXPECT_THROW(superpose(paths), std::invalid_argument);
}

TEST(ArrivalsDirect, AlwaysOnIsPlainPoisson) {
  const BinarySourcePath on(Phase::on, {}, 1e4);
  auto rng = derive_stream(10, {"poisson"});
  EXPECT_NEAR(static_cast<double>(arrivals_direct(on, 1.0, rng).epochs.size()) / 1e4, 1.0, 0.02);
}

TEST(ArrivalsDirect, AlwaysOffIsSilent) {
  const BinarySourcePath off(Phase::off, {}, 100.0);
  auto rng = derive_stream(11, {"silent"});
  EXPECT_TRUE(arrivals_direct(off, 5.0, rng).epochs.empty());
}

TEST(ArrivalsDirect, RateIsLambdaGamma) {
  auto rng = derive_stream(12, {"rate"});
  const auto p = simulate_source(kExp1, kExp1, 1e4, rng);
  const auto a = arrivals_direct(p, 2.0, rng);
  EXPECT_NEAR(static_cast<double>(a.epochs.size()) / 1e4, 1.0, 0.02);
}

TEST(ArrivalsDirect, EveryArrivalFallsInAnOnPeriod) {
  auto rng = derive_stream(13, {"on-only"});
  const auto p = simulate_source(kExp1, PeriodDistribution::exponential(2.0), 500.0, rng);
  const auto a = arrivals_direct(p, 3.0, rng);
  ASSERT_FALSE(a.epochs.empty());
  for (double e : a.epochs) {
    EXPECT_EQ(p.state(e), 1);
    EXPECT_LT(p.cumulative_on_time(std::max(0.0, e - 1e-9)), p.cumulative_on_time(std::min(500.0, e + 1e-9)));
  }
}

TEST(ArrivalsDirect, CountingProcessIsMonotone) {
  auto rng = derive_stream(14, {"count"});
  std::vector<BinarySourcePath> paths;
  for (int i = 0; i < 5; ++i) paths.push_back(simulate_source(kExp1, kExp1, 50.0, rng));
  std::vector<RandomStream> streams;
  for (int i = 0; i < 5; ++i) streams.push_back(derive_stream(14, {"arr", i}));
  const auto a = arrivals_direct(paths, 1.0, streams);
  EXPECT_TRUE(std::is_sorted(a.epochs.begin(), a.epochs.end()));
  EXPECT_EQ(a.source_ids.size(), a.epochs.size());
  std::size_t prev = 0;
  for (double t = 0.0; t <= 50.0; t += 0.5) {
    EXPECT_GE(a.count(t), prev);
    prev = a.count(t);
  }
}

TEST(ArrivalsModulated, SingleAlwaysOnSourceMatchesDirectLaw) {
  const BinarySourcePath on(Phase::on, {}, 10.0);
  const std::vector<BinarySourcePath> one{on};
  const auto sup = superpose(one);
  std::vector<double> d, m;
  for (int r = 0; r < 4000; ++r) {
    auto a = derive_stream(15, {"d", r});
    auto b = derive_stream(15, {"m", r});
    d.push_back(static_cast<double>(arrivals_direct(on, 1.0, a).count(10.0)));
    m.push_back(static_cast<double>(arrivals_modulated(sup, 1.0, b).count(10.0)));
  }
  EXPECT_FALSE(ks_two_sample(d, m).reject());
}

TEST(ArrivalsModulated, SuperposedRate) {
  auto rng = derive_stream(16, {"sup-rate"});
  std::vector<BinarySourcePath> paths;
  for (int i = 0; i < 3; ++i) paths.push_back(simulate_source(kExp1, kExp1, 1000.0, rng));
  const auto a = arrivals_modulated(superpose(paths), 1.0, rng);
  EXPECT_NEAR(static_cast<double>(a.epochs.size()) / (3 * 0.5 * 1000.0), 1.0, 0.05);
  EXPECT_TRUE(a.source_ids.empty());
}

TEST(ArrivalsModulated, LemmaOneAtTimeTen) {
  std::vector<double> d, m;
  for (int r = 0; r < 10000; ++r) {
    auto sd = derive_stream(17, {"ds", r});
    std::vector<BinarySourcePath> pd;
    for (int i = 0; i < 3; ++i) pd.push_back(simulate_source(kExp1, kExp1, 10.0, sd));
    std::vector<RandomStream> streams;
    for (int i = 0; i < 3; ++i) streams.push_back(derive_stream(17, {"da", r, i}));
    d.push_back(static_cast<double>(arrivals_direct(pd, 1.0, streams).count(10.0)));

    auto sm = derive_stream(17, {"ms", r});
    std::vector<BinarySourcePath> pm;
    for (int i = 0; i < 3; ++i) pm.push_back(simulate_source(kExp1, kExp1, 10.0, sm));
    auto am = derive_stream(17, {"ma", r});
    m.push_back(static_cast<double>(arrivals_modulated(superpose(pm), 1.0, am).count(10.0)));
  }
  EXPECT_FALSE(ks_two_sample(d, m).reject());
}
