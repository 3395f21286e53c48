#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "gwlimits/gen_dist.hpp"
#include "gwlimits/montecarlo.hpp"
#include "gwlimits/reports.hpp"

using namespace gwlimits;

namespace {

OffspringLaw binary() { return make_law({0.0, 0.5, 0.5}); }
OffspringLaw bot() { return make_law({0.0, 0.0, 0.5, 0.5}); }

SimConfig config(std::size_t reps, int n, unsigned workers = 1) {
  SimConfig c;
  c.seed = 1234;
  c.replicates = reps;
  c.n = n;
  c.workers = workers;
  return c;
}

}  // namespace

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  SplitMix64 a = replicate_stream(9, 3), b = replicate_stream(9, 3), c = replicate_stream(9, 4);
  EXPECT_EQ(a(), b());
  EXPECT_NE(b(), c());
  SplitMix64 u = replicate_stream(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Alias, FrequenciesMatchLaw) {
  const std::vector<double> p{0.1, 0.0, 0.6, 0.3};
  const AliasTable table(p);
  SplitMix64 rng = replicate_stream(5, 0);
  std::vector<double> counts(4, 0.0);
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) counts[table.sample(rng)] += 1.0;
  for (std::size_t j = 0; j < 4; ++j) {
    const double se = std::sqrt(p[j] * (1 - p[j]) / draws);
    EXPECT_NEAR(counts[j] / draws, p[j], 4 * se + 1e-12);
  }
}

TEST(Trajectory, SupportFloors) {
  SplitMix64 rng = replicate_stream(3, 0);
  for (int r = 0; r < 50; ++r) {
    const auto path = simulate_trajectory(bot(), 8, rng);
    ASSERT_EQ(path.size(), 9u);
    EXPECT_EQ(path[0], 1u);
    for (std::size_t i = 0; i < path.size(); ++i) EXPECT_GE(path[i], std::uint64_t(1) << i);
  }
}

TEST(Trajectory, MeanMatchesExactPmf) {
  const OffspringLaw law = binary();
  const int n = 8;
  const auto zs = run_replicates<double>(100000, 1, [&](std::size_t r) {
    SplitMix64 rng = replicate_stream(77, r);
    return double(simulate_trajectory(law, n, rng).back());
  });
  const double mean = std::accumulate(zs.begin(), zs.end(), 0.0) / double(zs.size());
  double var = 0.0;
  for (double z : zs) var += (z - mean) * (z - mean);
  const double se = std::sqrt(var / double(zs.size() - 1) / double(zs.size()));
  const GenerationPmf pmf = zn_pmf_compose(law, n, 256);
  double exact = 0.0;
  for (std::size_t k = 0; k <= pmf.cap(); ++k) exact += double(k) * pmf[k];
  EXPECT_NEAR(exact, std::pow(1.5, n), 1e-9);
  EXPECT_NEAR(mean, exact, 4 * se);
}

TEST(RnTail, ExactHandValue) {
  EXPECT_NEAR(exact_rn_tail(binary(), 1, 1.5), 0.375, 1e-15);
  EXPECT_EQ(exact_rn_tail(binary(), 3, 2.0), 0.0);
}

TEST(RnTail, EstimateAgreesWithExact) {
  for (int n : {1, 3, 5}) {
    const McEstimate e = estimate_rn_tail(binary(), n, 1.8, config(200000, n));
    EXPECT_NEAR(e.value, exact_rn_tail(binary(), n, 1.8), 4 * e.std_error);
    EXPECT_GT(e.value, 0.0);
    EXPECT_LT(e.value, 1.0);
  }
  EXPECT_EQ(estimate_rn_tail(bot(), 4, 1.9, config(1000, 4)).value, 1.0);
  EXPECT_EQ(estimate_rn_tail(binary(), 4, 2.0, config(1000, 4)).value, 0.0);
}

TEST(RnTail, IndependentOfWorkerCount) {
  const McEstimate a = estimate_rn_tail(binary(), 6, 1.7, config(20000, 6, 1));
  const McEstimate b = estimate_rn_tail(binary(), 6, 1.7, config(20000, 6, 3));
  EXPECT_EQ(a.hits, b.hits);
  EXPECT_EQ(a.trials, b.trials);
}

TEST(Conditional, VacuousConditionReducesToTail) {
  const SimConfig cfg = config(20000, 5);
  const ConditionalEstimate c = estimate_conditional_ldp(binary(), 5, 0, 1, 1.8, cfg);
  const McEstimate e = estimate_rn_tail(binary(), 5, 1.8, cfg);
  EXPECT_EQ(c.estimate.hits, e.hits);
  EXPECT_EQ(c.estimate.trials, e.trials);
  EXPECT_DOUBLE_EQ(c.estimate.acceptance, 1.0);
}

TEST(Conditional, MonotoneInThreshold) {
  double prev = 1.0;
  for (double a : {1.6, 1.8, 1.95}) {
    const double p = estimate_conditional_ldp(binary(), 8, 2, 4, a, config(50000, 8)).estimate.value;
    EXPECT_LE(p, prev);
    prev = p;
  }
}

TEST(Conditional, PmfCloseToExact) {
  const ConditionalEstimate c = estimate_conditional_ldp(binary(), 8, 2, 4, 1.8, config(100000, 8));
  const GenerationPmf exact = conditional_pmf(binary(), 8, 2, 4, 256);
  EXPECT_LT(total_variation(c.zn_pmf, exact.coeffs), 0.05);
}

TEST(Conditional, RejectsLowAcceptance) {
  EXPECT_THROW(estimate_conditional_ldp(binary(), 6, 1, 30, 1.8, config(1000, 6)), Error);
}

TEST(Ak, HistogramNormalizedAndTight) {
  const Histogram h6 = empirical_ak(binary(), 6, 1.8, config(100000, 6));
  const Histogram h10 = empirical_ak(binary(), 10, 1.8, config(100000, 10));
  const Histogram h12 = empirical_ak(binary(), 12, 1.8, config(100000, 12));
  EXPECT_NEAR(std::accumulate(h10.pmf.begin(), h10.pmf.end(), 0.0), 1.0, 1e-12);
  EXPECT_LE(pmf_median(h10.pmf), pmf_median(h6.pmf) + 2);
  EXPECT_LT(total_variation(h10.pmf, h12.pmf), 0.2);
}

TEST(Helpers, MedianTvSlope) {
  EXPECT_EQ(pmf_median(std::vector<double>{0.1, 0.3, 0.2, 0.4}), 2u);
  EXPECT_DOUBLE_EQ(total_variation(std::vector<double>{1.0}, std::vector<double>{0.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(least_squares_slope(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}), 2.0);
}

TEST(WSamples, MartingaleMean) {
  const WSample w = empirical_w(binary(), 10, config(50000, 10));
  EXPECT_NEAR(w.mean, 1.0, 4 * w.std_error);
  EXPECT_FALSE(w.left_tail_slope.has_value());
}

TEST(WSamples, SubcriticalMassNearZero) {
  const OffspringLaw sub = make_law({0.0, 0.6, 0.0, 0.4});
  WSample w = empirical_w(sub, 10, config(20000, 10));
  std::sort(w.values.begin(), w.values.end());
  const double x = w.values[w.values.size() / 10];
  EXPECT_GT(x, 0.0);
  const auto below = std::count_if(w.values.begin(), w.values.end(), [&](double v) { return v <= x; });
  EXPECT_GT(below, 0);
}

TEST(WSamples, BoettcherLeftTailSlope) {
  const auto s10 = empirical_w(bot(), 10, config(20000, 10)).left_tail_slope;
  const auto s12 = empirical_w(bot(), 12, config(20000, 12)).left_tail_slope;
  ASSERT_TRUE(s10 && s12);
  EXPECT_GT(*s10, 0.0);
  EXPECT_GT(*s12, 0.0);
  EXPECT_LT(std::abs(*s12 / *s10 - 1.0), 0.5);
}

TEST(Paths, ShapeOfRatioPath) {
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  for (std::uint64_t r = 0; r < 20; ++r) {
    SplitMix64 rng = replicate_stream(11, r);
    const auto path = sample_rn_path(binary(), 6, grid, rng);
    EXPECT_EQ(path.front().second, 0.0);
    for (std::size_t i = 1; i < path.size(); ++i) EXPECT_GE(path[i].second, path[i - 1].second);
    EXPECT_GE(path.back().second, 1.0);
    EXPECT_LE(path.back().second, 2.0);
  }
}

TEST(Reports, IdenticalAcrossWorkers) {
  SimulateRequest req;
  req.task = SimTask::Ak;
  req.config = config(5000, 8);
  const std::string one = simulate_report(binary(), req).dump();
  req.config.workers = 4;
  EXPECT_EQ(simulate_report(binary(), req).dump(), one);
}
