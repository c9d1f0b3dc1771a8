// The oracles are checked against hand-worked cases before anything is
// compared against them.

#include <gtest/gtest.h>

#include "oracles.hpp"

TEST(Oracle, BfsHandCases) {
  using oracle::BlocksGoal;
  const std::vector<int> flat{oracle::kTable, oracle::kTable, oracle::kTable};
  EXPECT_EQ(oracle::bfs_plan_length(flat, BlocksGoal{{{0, 1}, {1, 2}}, {}}), 4);
  EXPECT_EQ(oracle::bfs_plan_length(flat, BlocksGoal{{}, {0}}), 0);
  EXPECT_EQ(oracle::bfs_plan_length(flat, BlocksGoal{{{0, 1}, {1, 0}}, {}}), std::nullopt);
  const std::vector<int> covered{oracle::kTable, 0, oracle::kTable};  // b on a
  EXPECT_EQ(oracle::bfs_plan_length(covered, BlocksGoal{{}, {0}}), 1);  // unstack b
  const std::vector<int> held{oracle::kHeld, oracle::kTable};
  EXPECT_EQ(oracle::bfs_plan_length(held, BlocksGoal{{{0, 1}}, {}}), 1);
}

TEST(Oracle, WorldConversionIsValid) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto below = oracle::random_blocks(5, rng, true);
    EXPECT_TRUE(oracle::to_world(below).is_valid());
  }
}

TEST(Oracle, WilsonHandValue) {
  const auto [lo, hi] = oracle::wilson_by_hand(44, 50, 1.96);
  EXPECT_NEAR(lo, 0.7619, 1e-4);
  EXPECT_NEAR(hi, 0.9438, 1e-4);
}

TEST(Oracle, GridArgmaxOfParabola) {
  EXPECT_NEAR(oracle::grid_argmax([](double x) { return -(x - 0.3) * (x - 0.3); }, 100001), 0.3, 1e-5);
}

TEST(Oracle, F1AndEceHandCases) {
  const nsplan::PredictionBatch b{{0.9, 1}, {0.8, 0}, {0.2, 1}, {0.1, 0}};
  EXPECT_NEAR(oracle::f1_brute(b, 0.5), 0.5, 1e-15);  // tp 1, fp 1, fn 1
  EXPECT_NEAR(oracle::ece_brute({{0.9, 0}, {0.9, 0}}, 10), 0.9, 1e-15);
}
