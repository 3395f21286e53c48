#include <cmath>

#include <gtest/gtest.h>

#include "gwlimits/asymptotics.hpp"
#include "gwlimits/ldp.hpp"

using namespace gwlimits;

namespace {

OffspringLaw binary() { return make_law({0.0, 0.5, 0.5}); }
OffspringLaw bot() { return make_law({0.0, 0.0, 0.5, 0.5}); }

// sup over theta in [-20, 20], step 1e-4
double legendre_grid(const OffspringLaw& law, double x) {
  double best = -kInf;
  for (int i = 0; i <= 400000; ++i) {
    const double theta = -20.0 + 1e-4 * i;
    double mgf = 0.0;
    for (std::size_t j = 0; j <= law.degree(); ++j) mgf += law.prob(j) * std::exp(theta * double(j));
    best = std::max(best, theta * x - std::log(mgf));
  }
  return best;
}

}  // namespace

TEST(Cumulant, HandValues) {
  const OffspringLaw law = binary();
  EXPECT_EQ(cumulant(law, 0.0), 0.0);
  EXPECT_NEAR(cumulant(law, 1.0), std::log((std::exp(1.0) + std::exp(2.0)) / 2.0), 1e-14);
  const double h = 1e-6;
  EXPECT_NEAR((cumulant(law, h) - cumulant(law, -h)) / (2 * h), law.mean(), 1e-6);
  // no overflow far out
  EXPECT_NEAR(cumulant(law, 800.0), 1600.0 + std::log(0.5), 1e-9);
}

TEST(Legendre, ZeroAtMeanAndBoundaries) {
  const OffspringLaw law = binary();
  EXPECT_NEAR(legendre(law, 1.5), 0.0, 1e-10);
  EXPECT_EQ(legendre(law, 2.0), -std::log(0.5));
  EXPECT_EQ(legendre(law, 1.0), -std::log(0.5));
  EXPECT_TRUE(std::isinf(legendre(law, 2.1)));
  EXPECT_TRUE(std::isinf(legendre(law, 0.9)));
}

TEST(Legendre, MatchesGridSearch) {
  EXPECT_NEAR(legendre(binary(), 1.75), legendre_grid(binary(), 1.75), 1e-6);
  const OffspringLaw law = make_law({0.1, 0.2, 0.3, 0.4});
  for (double x : {0.3, 1.0, 2.0, 2.8}) EXPECT_NEAR(legendre(law, x), legendre_grid(law, x), 1e-6);
}

TEST(Legendre, ConvexOnInterior) {
  const OffspringLaw law = make_law({0.1, 0.2, 0.3, 0.4});
  for (double x = 0.1; x < 2.9; x += 0.05)
    EXPECT_GE(legendre(law, x + 0.05) - 2 * legendre(law, x) + legendre(law, x - 0.05), -1e-10);
}

TEST(WCumulant, DerivativesAtZero) {
  const OffspringLaw law = binary();
  EXPECT_EQ(w_cumulant(law, 0.0), 0.0);
  const double h = 1e-3;
  EXPECT_NEAR((w_cumulant(law, h) - w_cumulant(law, -h)) / (2 * h), 1.0, 1e-6);
  EXPECT_NEAR((w_cumulant(law, h) - 2 * w_cumulant(law, 0.0) + w_cumulant(law, -h)) / (h * h), 1.0 / 3.0, 1e-4);
}

TEST(WCumulant, NegativeSideIsLaplace) {
  const OffspringLaw law = binary();
  EXPECT_NEAR(w_cumulant(law, -2.0), std::log(w_laplace(law, 2.0)), 1e-12);
}

TEST(WLegendre, ZeroAtOneInfiniteBelowZero) {
  const OffspringLaw law = binary();
  EXPECT_NEAR(w_legendre(law, 1.0), 0.0, 1e-8);
  EXPECT_TRUE(std::isinf(w_legendre(law, -0.5)));
  EXPECT_GT(w_legendre(law, 2.0), 0.0);
  EXPECT_GT(w_legendre(law, 0.5), 0.0);
}

TEST(Rates, OffspringHandComposition) {
  const OffspringLaw law = binary();
  const Classification cls = classify(law);
  const RateRegime r = schroeder_regime(cls, 1, Growth::Linear, 1.0);
  EXPECT_DOUBLE_EQ(r.B, std::log(1.5));
  const double inner = legendre_grid(law, 1.75);
  const double expect = -std::log(law.eval(std::exp(-inner))) + std::log(1.5);
  EXPECT_NEAR(rate_conditional_offspring(law, cls, r, 1.75), expect, 1e-6);
}

TEST(Rates, ZeroAtMeanAndInfiniteOutsideSupport) {
  const OffspringLaw law = binary();
  const Classification cls = classify(law);
  const RateRegime r0 = schroeder_regime(cls, 2, Growth::Linear, 0.0);
  EXPECT_NEAR(rate_conditional_offspring(law, cls, r0, 1.5), 0.0, 1e-10);
  EXPECT_TRUE(std::isinf(rate_conditional_offspring(law, cls, r0, 2.5)));
  EXPECT_NEAR(rate_conditional_w(law, cls, schroeder_regime(cls, 1, Growth::Linear, 0.5), 1.0), 0.5 * std::log(1.5), 1e-8);
  EXPECT_TRUE(std::isinf(rate_conditional_w(law, cls, r0, 0.0)));
  EXPECT_DOUBLE_EQ(rate_conditional_offspring(law, cls, schroeder_regime(cls, 1, Growth::Superlinear), 1.9), std::log(1.5));
}

TEST(Rates, BConstantByRegime) {
  EXPECT_DOUBLE_EQ(regime_constant(classify(make_law({0.0, 0.6, 0.0, 0.4}))), -std::log(0.6));
  EXPECT_DOUBLE_EQ(regime_constant(classify(binary())), std::log(1.5));
  EXPECT_THROW(regime_constant(classify(bot())), Error);
}

TEST(Rates, BoettcherHandComposition) {
  const OffspringLaw law = bot();
  const Classification cls = classify(law);
  const double s = std::exp(-legendre_grid(law, 2.75));
  const double expect = -log_pgf_iterate_scaled(law, 40, s);
  EXPECT_NEAR(rate_boettcher_offspring(law, cls, 0, 1.0, 2.75), expect, 1e-6);
  EXPECT_NEAR(rate_boettcher_offspring(law, cls, 1, 1.0, 2.5), 0.0, 1e-12);
  EXPECT_NEAR(rate_boettcher_offspring(law, cls, 1, 0.0, 2.5), 0.0, 1e-12);
}

TEST(PathRate, LawOfLargeNumbersPath) {
  const OffspringLaw law = binary();
  const Classification cls = classify(law);
  const std::vector<PathPoint> lln{{0.0, 0.0}, {0.5, 0.75}, {1.0, 1.5}};
  EXPECT_NEAR(path_rate(law, cls, schroeder_regime(cls, 1, Growth::Linear, 0.0), lln), 0.0, 1e-10);
  EXPECT_NEAR(path_rate(law, cls, schroeder_regime(cls, 1, Growth::Linear, 1.0), lln), std::log(1.5), 1e-10);
  EXPECT_TRUE(std::isinf(path_rate(law, cls, schroeder_regime(cls, 1, Growth::Linear), {{0.0, 0.1}, {1.0, 1.6}})));
}

TEST(PathRate, TwoSegments) {
  const OffspringLaw law = binary();
  const Classification cls = classify(law);
  const RateRegime r = schroeder_regime(cls, 1, Growth::Linear, 0.0);
  const double i1 = -std::log(law.eval(0.5));  // Λ*(1) = -log p_1
  const double i2 = -std::log(law.eval(0.5));  // Λ*(2) = -log p_2
  const double rate = path_rate(law, cls, r, {{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.5}});
  EXPECT_NEAR(rate, 0.5 * i1 + 0.5 * i2, 1e-12);
}

TEST(RateTable, MatchesPointwise) {
  const OffspringLaw law = binary();
  const Classification cls = classify(law);
  const RateRegime r = schroeder_regime(cls, 1, Growth::Linear, 0.5);
  const RateTable t = rate_table(law, RateKind::Offspring, r, {1.2, 1.5, 1.9});
  for (std::size_t i = 0; i < t.xs.size(); ++i) {
    EXPECT_DOUBLE_EQ(t.inner[i], legendre(law, t.xs[i]));
    EXPECT_DOUBLE_EQ(t.rates[i], rate_conditional_offspring(law, cls, r, t.xs[i]));
  }
}
