#include <gtest/gtest.h>

#include "nsplan/error.hpp"
#include "nsplan/stats.hpp"
#include "oracles.hpp"

using namespace nsplan;

TEST(Wilson, QuotedInterval) {
  const auto [lo, hi] = wilson_ci(44, 50, 1.96);
  EXPECT_NEAR(lo, 0.762, 5e-4);
  EXPECT_NEAR(hi, 0.944, 5e-4);
}

TEST(Wilson, Boundaries) {
  EXPECT_EQ(wilson_ci(0, 10).first, 0.0);
  const auto [lo, hi] = wilson_ci(10, 10);
  const double z2 = 1.96 * 1.96;
  const double by_hand = (1 + z2 / 20) / (1 + z2 / 10) + 1.96 * std::sqrt(z2 / 400) / (1 + z2 / 10);
  EXPECT_NEAR(hi, std::min(1.0, by_hand), 1e-12);
  EXPECT_LE(hi, 1.0);
  EXPECT_LT(lo, 1.0);
}

TEST(Wilson, MatchesHandFormulaAndContainsRate) {
  for (long n = 1; n <= 60; ++n) {
    for (long k = 0; k <= n; ++k) {
      for (double z : {1.0, 1.96, 2.58}) {
        const auto [lo, hi] = wilson_ci(k, n, z);
        const auto [hlo, hhi] = oracle::wilson_by_hand(static_cast<double>(k), static_cast<double>(n), z);
        EXPECT_NEAR(lo, std::max(0.0, hlo), 1e-12);
        EXPECT_NEAR(hi, std::min(1.0, hhi), 1e-12);
        const double p = static_cast<double>(k) / static_cast<double>(n);
        EXPECT_LE(lo, p + 1e-15);
        EXPECT_GE(hi, p - 1e-15);
        EXPECT_GE(lo, 0.0);
        EXPECT_LE(hi, 1.0);
      }
    }
  }
}

TEST(Wilson, DomainErrors) {
  EXPECT_THROW(wilson_ci(5, 4), DomainError);
  EXPECT_THROW(wilson_ci(-1, 4), DomainError);
  EXPECT_THROW(wilson_ci(0, 0), DomainError);
  EXPECT_THROW(wilson_ci(1, 4, 0.0), DomainError);
}

TEST(CohensD, Examples) {
  EXPECT_NEAR(cohens_d({1, 2, 3}, {2, 3, 4}), -1.0, 1e-12);
  EXPECT_NEAR(cohens_d({1, 2, 3, 4}, {1, 2, 3, 4}), 0.0, 1e-15);
  // b shifted by exactly one pooled sd
  const std::vector<double> a{2, 4, 6, 8};
  std::vector<double> b = a;
  const double pooled = std::sqrt(20.0 / 3.0);  // sample sd of a, and of b
  for (auto& v : b) v -= pooled;
  EXPECT_NEAR(cohens_d(a, b), 1.0, 1e-12);
}

TEST(CohensD, DomainErrors) {
  EXPECT_THROW(cohens_d({1}, {1, 2}), DomainError);
  EXPECT_THROW(cohens_d({1, 1}, {1, 1}), DomainError);
}
