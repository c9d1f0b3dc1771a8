#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "nsplan/calibration.hpp"
#include "nsplan/error.hpp"
#include "oracles.hpp"

using namespace nsplan;

namespace {

// Labels drawn from the stated confidence: calibrated by construction.
PredictionBatch calibrated_stream(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PredictionBatch out;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = u(rng);
    out.push_back({p, u(rng) < p ? 1 : 0});
  }
  return out;
}

}  // namespace

TEST(Binning, EndpointPlacement) {
  const auto bins = bin_predictions({{0.05, 0}, {0.95, 1}}, 10);
  ASSERT_EQ(bins.size(), 10u);
  EXPECT_EQ(bins[0].count, 1u);
  EXPECT_EQ(bins[9].count, 1u);
  EXPECT_EQ(bin_predictions({{1.0, 1}}, 10)[9].count, 1u);
  EXPECT_EQ(bin_predictions({{0.1, 1}}, 10)[1].count, 1u);
}

TEST(Binning, RejectsBadInput) {
  EXPECT_THROW(bin_predictions({}, 10), DomainError);
  EXPECT_THROW(bin_predictions({{0.5, 1}}, 0), DomainError);
  EXPECT_THROW(bin_predictions({{1.5, 1}}, 10), DomainError);
  EXPECT_THROW(bin_predictions({{0.5, 2}}, 10), DomainError);
}

TEST(Binning, CountsSumToBatchSize) {
  const auto batch = calibrated_stream(5000, 1);
  for (int m : {1, 3, 10, 15}) {
    std::size_t total = 0;
    for (const auto& b : bin_predictions(batch, m)) total += b.count;
    EXPECT_EQ(total, batch.size());
  }
}

TEST(Binning, CalibratedStreamIsCloseInEveryBin) {
  const auto bins = bin_predictions(calibrated_stream(10000, 2), 10);
  // four binomial standard errors per bin
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    const double se = std::sqrt(b.mean_confidence * (1 - b.mean_confidence) / static_cast<double>(b.count));
    EXPECT_LT(std::abs(b.accuracy - b.mean_confidence), 4 * se + 1e-3);
  }
}

TEST(Scores, Examples) {
  PredictionBatch sharp(20, {1.0, 1});
  auto r = reliability_report(sharp);
  EXPECT_EQ(r.ece, 0.0);
  EXPECT_EQ(r.mce, 0.0);
  EXPECT_EQ(r.brier, 0.0);

  PredictionBatch wrong(20, {0.9, 0});
  r = reliability_report(wrong);
  EXPECT_NEAR(r.ece, 0.9, 1e-12);
  EXPECT_NEAR(r.mce, 0.9, 1e-12);

  EXPECT_EQ(brier({{1.0, 1}}), 0.0);
  EXPECT_EQ(brier({{0.5, 0}}), 0.25);
  EXPECT_EQ(brier({{0.5, 1}}), 0.25);
  EXPECT_NEAR(brier({{0.8, 1}, {0.8, 0}}), 0.34, 1e-12);
}

TEST(Scores, CalibratedStreamEceSmall) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_LE(reliability_report(calibrated_stream(10000, seed)).ece, 0.02);
  }
}

TEST(Scores, EceMatchesBruteForceAndIsBelowMce) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto batch = calibrated_stream(200 + seed * 13, seed + 100);
    for (auto& p : batch) p.confidence = p.confidence * p.confidence;  // skewed
    const auto r = reliability_report(batch);
    EXPECT_NEAR(r.ece, oracle::ece_brute(batch, 10), 1e-12);
    EXPECT_LE(r.ece, r.mce + 1e-15);
    for (double v : {r.ece, r.mce, r.brier}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Scores, PermutationInvariant) {
  auto batch = calibrated_stream(3000, 7);
  const auto before = reliability_report(batch);
  std::mt19937_64 rng(8);
  std::shuffle(batch.begin(), batch.end(), rng);
  const auto after = reliability_report(batch);
  EXPECT_NEAR(before.ece, after.ece, 1e-12);
  EXPECT_NEAR(before.brier, after.brier, 1e-12);
}

TEST(Scores, SquaringConfidencesRaisesEce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto batch = calibrated_stream(10000, seed + 300);
    auto squashed = batch;
    for (auto& p : squashed) p.confidence = p.confidence * p.confidence;
    EXPECT_GT(reliability_report(squashed).ece, reliability_report(batch).ece);
  }
}

TEST(Verdict, InclusiveBoundary) {
  ReliabilityReport r;
  r.ece = 0.073;
  auto v = calibration_verdict(r, 0.1);
  EXPECT_TRUE(v.pass);
  EXPECT_EQ(v.epsilon_cal, 0.073);
  r.ece = 0.5;
  EXPECT_FALSE(calibration_verdict(r, 0.1).pass);
  r.ece = 0.1;
  EXPECT_TRUE(calibration_verdict(r, 0.1).pass);
}

TEST(PredictionsCsv, RoundTripWithHeader) {
  const auto batch = calibrated_stream(50, 4);
  std::stringstream io;
  write_predictions_csv(io, batch);
  const auto back = read_predictions_csv(io);
  ASSERT_EQ(back.size(), batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    EXPECT_NEAR(back[i].confidence, batch[i].confidence, 1e-8);
    EXPECT_EQ(back[i].label, batch[i].label);
  }
}

TEST(PredictionsCsv, ReportsBadLine) {
  std::stringstream in("confidence,label\n0.3,1\nnot,a number\n");
  try {
    read_predictions_csv(in);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
}
