#include <cmath>
#include <functional>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "gwlimits/gen_dist.hpp"
#include "gwlimits/series.hpp"

using namespace gwlimits;

namespace {

OffspringLaw binary() { return make_law({0.0, 0.5, 0.5}); }

// Law of Z_n by walking every family tree generation by generation.
std::map<std::size_t, double> enumerate_trees(const OffspringLaw& law, int n) {
  std::map<std::size_t, double> dist{{1, 1.0}};
  for (int g = 0; g < n; ++g) {
    std::map<std::size_t, double> next;
    for (const auto& [z, pz] : dist) {
      // each of z parents picks a family size independently
      std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t left, std::size_t acc, double p) {
        if (left == 0) {
          next[acc] += p;
          return;
        }
        for (std::size_t j = 0; j <= law.degree(); ++j)
          if (law.prob(j) > 0.0) walk(left - 1, acc + j, p * law.prob(j));
      };
      walk(z, 0, pz);
    }
    dist = std::move(next);
  }
  return dist;
}

}  // namespace

TEST(Series, HandProducts) {
  const TruncSeries a{{1.0, 1.0}};
  EXPECT_EQ(series_mul(a, a, 2).coeffs, (std::vector<double>{1.0, 2.0, 1.0}));
  EXPECT_EQ(series_mul(a, a, 1).coeffs, (std::vector<double>{1.0, 2.0}));
}

TEST(Series, FftMatchesSchoolbook) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TruncSeries a, b;
  for (int i = 0; i <= 200; ++i) a.coeffs.push_back(u(rng)), b.coeffs.push_back(u(rng));
  const TruncSeries slow = series_mul(a, b, 400, MulMethod::Schoolbook);
  const TruncSeries fast = series_mul(a, b, 400, MulMethod::Fft);
  ASSERT_EQ(slow.coeffs.size(), fast.coeffs.size());
  for (std::size_t k = 0; k < slow.coeffs.size(); ++k) EXPECT_NEAR(slow.coeffs[k], fast.coeffs[k], 1e-12);
}

TEST(Compose, IdentityCases) {
  const OffspringLaw law = binary();
  EXPECT_EQ(compose_poly(law, TruncSeries::identity(2), 2).coeffs, (std::vector<double>{0.0, 0.5, 0.5}));
  const TruncSeries f{{0.0, 0.5, 0.5}};
  const TruncSeries f2 = compose_poly(law, f, 4);
  const std::vector<double> expect{0.0, 0.25, 0.375, 0.25, 0.125};
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(f2.coeffs[k], expect[k], 1e-16);
}

TEST(ZnPmf, SmallGenerations) {
  const OffspringLaw law = binary();
  const GenerationPmf z0 = zn_pmf_compose(law, 0, 4);
  EXPECT_EQ(z0.coeffs, (std::vector<double>{0.0, 1.0, 0.0, 0.0, 0.0}));
  EXPECT_EQ(z0.tail_mass, 0.0);
  const GenerationPmf z1 = zn_pmf_compose(law, 1, 2);
  EXPECT_EQ(z1.coeffs, (std::vector<double>{0.0, 0.5, 0.5}));
}

TEST(ZnPmf, MatchesTreeEnumeration) {
  for (const OffspringLaw& law : {binary(), make_law({0.2, 0.3, 0.5}), make_law({0.0, 0.0, 0.5, 0.5})}) {
    for (int n : {2, 3}) {
      const auto exact = enumerate_trees(law, n);
      const std::size_t cap = exact.rbegin()->first;
      const GenerationPmf pmf = zn_pmf_compose(law, n, cap);
      for (std::size_t k = 0; k <= cap; ++k) {
        const auto it = exact.find(k);
        EXPECT_NEAR(pmf[k], it == exact.end() ? 0.0 : it->second, 1e-15) << "n=" << n << " k=" << k;
      }
      EXPECT_NEAR(pmf.tail_mass, 0.0, 1e-15);
    }
  }
}

TEST(ZnPmf, StructuralProperties) {
  const OffspringLaw law = make_law({0.1, 0.3, 0.2, 0.4});
  const GenerationPmf pmf = zn_pmf_compose(law, 6, 600);
  EXPECT_NEAR(pmf[0], pgf_iterate(law, 6, 0.0), 1e-14);
  double total = 0.0, mean = 0.0;
  for (std::size_t k = 0; k <= pmf.cap(); ++k) {
    EXPECT_GE(pmf[k], 0.0);
    total += pmf[k];
    mean += double(k) * pmf[k];
  }
  EXPECT_LE(total, 1.0 + 1e-10);
  EXPECT_LE(mean, std::pow(law.mean(), 6) * (1.0 + 1e-6));
  EXPECT_GE(pmf.tail_mass, 0.0);
}

TEST(ZnPmf, SupportFloorAndSingletonPath) {
  const OffspringLaw bot = make_law({0.0, 0.0, 0.5, 0.5});
  const GenerationPmf pmf = zn_pmf_compose(bot, 5, 300);
  for (std::size_t k = 0; k < 32; ++k) EXPECT_EQ(pmf[k], 0.0);
  EXPECT_NEAR(pmf[32], std::pow(0.5, 31), 1e-25);

  const OffspringLaw law = make_law({0.0, 0.6, 0.0, 0.4});
  for (int n : {3, 9, 15}) EXPECT_NEAR(zn_pmf_compose(law, n, 64)[1] / std::pow(0.6, n), 1.0, 1e-13);
}

TEST(ZnPmfDft, DegreeTwoPolynomial) {
  const GenerationPmf p = zn_pmf_dft(binary(), 1, 8);
  const std::vector<double> expect{0.0, 0.5, 0.5, 0, 0, 0, 0, 0};
  for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(p[k], expect[k], 1e-14);
}

TEST(ZnPmfDft, AliasingFoldsHighMassDown) {
  const GenerationPmf p = zn_pmf_dft(binary(), 2, 4);
  EXPECT_NEAR(p[0], 0.125, 1e-14);
  EXPECT_NEAR(p[1], 0.25, 1e-14);
}

TEST(ZnPmfDft, AgreesWithComposition) {
  const OffspringLaw law = binary();
  const GenerationPmf a = zn_pmf_compose(law, 6, 4095);
  const GenerationPmf b = zn_pmf_dft(law, 6, 4096);
  for (std::size_t k = 0; k < 4096; ++k) EXPECT_NEAR(a[k], b[k], 1e-10);
}

TEST(ZnPmfDft, RejectsNonPowerOfTwo) {
  EXPECT_THROW(zn_pmf_dft(binary(), 3, 12), Error);
}

TEST(Tail, HandValues) {
  const GenerationPmf pmf = zn_pmf_compose(binary(), 2, 4);
  EXPECT_DOUBLE_EQ(tail_probability(pmf, 0), 1.0);
  EXPECT_NEAR(tail_probability(pmf, 3), 0.375, 1e-16);
  EXPECT_THROW(tail_probability(pmf, 5), Error);
}

TEST(ConditionalLaplace, HandValues) {
  const OffspringLaw law = binary();
  const double f = law.eval(std::exp(-1.0));
  EXPECT_NEAR(f, 0.5 * std::exp(-1.0) + 0.5 * std::exp(-2.0), 1e-16);
  EXPECT_NEAR(conditional_laplace(law, 2, 1, 2, 1.0), f * f, 1e-14);
  EXPECT_NEAR(conditional_laplace(law, 5, 0, 0, 0.7), pgf_iterate(law, 5, std::exp(-0.7)), 1e-14);
  EXPECT_LT(conditional_laplace(law, 4, 1, 2, 60.0), 1e-20);
}

TEST(ConditionalPmf, SumsToOneAndMatchesLaplace) {
  const OffspringLaw law = binary();
  const GenerationPmf pmf = conditional_pmf(law, 6, 2, 3, 256);
  double total = 0.0, laplace = 0.0;
  for (std::size_t k = 0; k <= pmf.cap(); ++k) total += pmf[k], laplace += pmf[k] * std::exp(-0.3 * double(k));
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(laplace, conditional_laplace(law, 6, 2, 3, 0.3), 1e-12);
}
