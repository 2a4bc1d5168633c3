#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "onoff/gaussian.hpp"
#include "onoff/random.hpp"
#include "onoff/stats.hpp"

using namespace onoff;

namespace {

std::vector<double> normals(std::size_t n, double mean, std::uint64_t seed) {
  auto rng = derive_stream(seed, {"normals"});
  std::normal_distribution<double> nd(mean, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

// O(n m) brute-force two-sample KS statistic: evaluate both ECDFs at every
// sample point.
double brute_ks(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  auto ecdf = [](const std::vector<double>& s, double x) {
    double c = 0;
    for (double v : s) c += v <= x;
    return c / static_cast<double>(s.size());
  };
  for (const auto* s : {&a, &b}) {
    for (double x : *s) d = std::max(d, std::abs(ecdf(a, x) - ecdf(b, x)));
  }
  return d;
}

}  // namespace

TEST(KsTwoSample, IdenticalSamples) {
  const auto a = normals(500, 0.0, 1);
  EXPECT_EQ(ks_two_sample(a, a).statistic, 0.0);
}

TEST(KsTwoSample, NullAndSeparated) {
  const auto a = normals(10000, 0.0, 2);
  const auto b = normals(10000, 0.0, 3);
  const auto c = normals(10000, 1.0, 4);
  EXPECT_FALSE(ks_two_sample(a, b).reject());
  EXPECT_TRUE(ks_two_sample(a, c).reject());
  EXPECT_LT(ks_two_sample(a, c).p_value, 1e-10);
}

TEST(KsTwoSample, CriticalValue) {
  std::vector<double> a(100, 0.0), b(400, 0.0);
  const auto r = ks_two_sample(a, b);
  EXPECT_NEAR(r.critical, std::sqrt(-0.5 * std::log(0.005)) * std::sqrt(500.0 / 40000.0), 1e-12);
  EXPECT_NEAR(ks_coefficient(0.01), 1.6276, 1e-4);
  EXPECT_NEAR(ks_coefficient(0.05), 1.3581, 1e-4);
}

TEST(KsTwoSample, MatchesBruteForceWithTies) {
  for (int i = 0; i < 30; ++i) {
    auto rng = derive_stream(5, {"ties", i});
    std::vector<double> a(40 + i), b(25 + 2 * i);
    for (auto& x : a) x = std::floor(6.0 * rng.uniform_open());
    for (auto& x : b) x = std::floor(5.0 * rng.uniform_open()) + (i % 2 ? 0.5 : 0.0);
    EXPECT_NEAR(ks_two_sample(a, b).statistic, brute_ks(a, b), 1e-15);
  }
}

TEST(KsTwoSample, NullRejectionRateNearLevel) {
  int rejects = 0;
  for (int i = 0; i < 400; ++i) {
    rejects += ks_two_sample(normals(200, 0.0, 100 + i), normals(300, 0.0, 1000 + i), 0.05).reject();
  }
  // asymptotic test is slightly conservative; 5% level gives about 20 of 400
  EXPECT_LT(rejects, 36);
}

TEST(Hurst, RecoversFgnIndex) {
  for (double h : {0.5, 0.75}) {
    const FbmGenerator gen(h, TimeGrid{1.0, 4097});
    std::vector<std::vector<double>> series;
    for (int r = 0; r < 32; ++r) {
      auto rng = derive_stream(6, {"fgn", r});
      series.push_back(gen.draw_increments(rng));
    }
    const auto est = estimate_hurst(series);
    EXPECT_NEAR(est.hurst, h, 0.05);
    EXPECT_GT(est.standard_error, 0.0);
    EXPECT_EQ(est.block_sizes.front(), 1.0);
    EXPECT_EQ(est.block_sizes.back(), 256.0);
  }
}

TEST(Hurst, RejectsDegenerateInput) {
  std::vector<std::vector<double>> constant(32, std::vector<double>(1024, 1.0));
  EXPECT_THROW(estimate_hurst(constant), std::domain_error);
  std::vector<std::vector<double>> few(10, std::vector<double>(1024, 1.0));
  EXPECT_THROW(estimate_hurst(few), std::invalid_argument);
  std::vector<std::vector<double>> short_series(32, std::vector<double>(100, 1.0));
  EXPECT_THROW(estimate_hurst(short_series), std::invalid_argument);
}

TEST(VarianceCurve, BrownianEnsemble) {
  const auto grid = TimeGrid::covering(4.0, 0.5);
  Ensemble e("bm", grid);
  for (int r = 0; r < 20000; ++r) {
    auto rng = derive_stream(7, {"bmens", r});
    e.add(bm_path(1.0, grid, rng));
  }
  const std::vector<double> times{1.0, 2.0, 4.0};
  for (const auto& pt : empirical_variance_curve(e, times)) {
    EXPECT_NEAR(pt.variance / pt.t, 1.0, 0.03);
    // Var of a sample variance of normals is 2 s^4 / n
    EXPECT_NEAR(pt.standard_error, std::sqrt(2.0 / 20000) * pt.t, 0.1 * std::sqrt(2.0 / 20000) * pt.t);
  }
}

TEST(VarianceCurve, ZeroEnsemble) {
  const auto grid = TimeGrid::covering(2.0, 1.0);
  Ensemble e("zero", grid);
  for (int r = 0; r < 5; ++r) e.add(SampledPath(grid));
  const std::vector<double> times{1.0, 2.0};
  for (const auto& pt : empirical_variance_curve(e, times)) EXPECT_EQ(pt.variance, 0.0);
}

TEST(CollapseGap, Examples) {
  const TimeGrid g{1.0, 4};
  const SampledPath a(g, {0, 1, 2, 3});
  SampledPath b = a;
  EXPECT_EQ(collapse_gap(a, b), 0.0);
  b.values[2] += 0.3;
  EXPECT_NEAR(collapse_gap(a, b), 0.3, 1e-15);
  EXPECT_THROW(collapse_gap(a, SampledPath(TimeGrid{0.5, 4})), std::invalid_argument);
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(Ensemble, RowsColumnsAndGridChecks) {
  const TimeGrid g{0.5, 3};
  Ensemble e("x", g);
  e.add(SampledPath(g, {0, 1, 2}), 11);
  e.add(SampledPath(g, {0, 3, 4}), 12);
  EXPECT_EQ(e.replications(), 2u);
  EXPECT_EQ(e.column(0.5), (std::vector<double>{1, 3}));
  EXPECT_EQ(e.row(1)[2], 4.0);
  EXPECT_EQ(e.seeds()[1], 12u);
  EXPECT_THROW(e.add(SampledPath(TimeGrid{1.0, 3})), std::invalid_argument);
  EXPECT_THROW(e.column(0.3), std::out_of_range);
}

TEST(ConvergenceReport, LimitAgainstItselfAndPassRule) {
  const auto grid = TimeGrid::covering(1.0, 0.5);
  auto make = [&](const char* label, double shift, int reps) {
    Ensemble e(label, grid);
    for (int r = 0; r < reps; ++r) {
      auto rng = derive_stream(8, {label, r});
      auto p = bm_path(1.0, grid, rng);
      for (auto& v : p.values) v += shift;
      e.add(p);
    }
    return e;
  };
  const auto limit = make("limit", 0.0, 2000);
  const std::vector<double> times{0.5, 1.0};

  std::vector<LadderEnsemble> same{{1, 1, make("copy", 0.0, 2000)}};
  for (const auto& row : marginal_convergence_report(same, limit, times).rows) EXPECT_FALSE(row.ks.reject());

  std::vector<LadderEnsemble> ladder{{10, 10, make("n10", 0.6, 500)},
                                     {100, 100, make("n100", 0.2, 500)},
                                     {1000, 1000, make("n1000", 0.0, 500)}};
  const auto rep = marginal_convergence_report(ladder, limit, times);
  EXPECT_EQ(rep.rows.size(), 6u);
  EXPECT_TRUE(rep.pass());
  for (const auto& v : rep.verdicts) {
    EXPECT_TRUE(v.decreased);
    EXPECT_TRUE(v.within_bound);
  }

  std::vector<LadderEnsemble> stuck{{10, 10, make("s10", 0.5, 500)}, {1000, 1000, make("s1000", 0.5, 500)}};
  const auto bad = marginal_convergence_report(stuck, limit, times);
  EXPECT_FALSE(bad.pass());
  // a decrease alone passes only when the bound is not required
  std::vector<LadderEnsemble> slow{{10, 10, make("w10", 1.0, 500)}, {1000, 1000, make("w1000", 0.5, 500)}};
  EXPECT_FALSE(marginal_convergence_report(slow, limit, times, true).pass());
  EXPECT_TRUE(marginal_convergence_report(slow, limit, times, false).pass());
}
