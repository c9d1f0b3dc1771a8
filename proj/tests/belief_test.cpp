#include <gtest/gtest.h>

#include <random>

#include "nsplan/belief.hpp"
#include "nsplan/error.hpp"

using namespace nsplan;

TEST(Predicate, SymmetricRelationsAreCanonical) {
  EXPECT_EQ(touching("b", "a"), touching("a", "b"));
  EXPECT_EQ(close_to("z", "c").args(), (std::vector<std::string>{"c", "z"}));
  EXPECT_NE(on("a", "b"), on("b", "a"));
}

TEST(Predicate, RejectsBadArguments) {
  EXPECT_THROW(GroundPredicate(Relation::On, {"a"}), DomainError);
  EXPECT_THROW(GroundPredicate(Relation::Clear, {"a", "b"}), DomainError);
  EXPECT_THROW(on("a", "a"), DomainError);
  EXPECT_THROW(clear(""), DomainError);
}

TEST(Predicate, ParseRoundTrip) {
  for (const auto& p : all_ground_predicates({"a", "b", "c"})) {
    EXPECT_EQ(GroundPredicate::parse(p.to_string()), p);
  }
  EXPECT_EQ(GroundPredicate::parse(" On( a , b ) "), on("a", "b"));
  EXPECT_THROW(GroundPredicate::parse("Above(a,b)"), DomainError);
}

TEST(PredicateUncertainty, Examples) {
  EXPECT_DOUBLE_EQ(predicate_uncertainty(0.5), 0.5);
  EXPECT_DOUBLE_EQ(predicate_uncertainty(1.0), 0.0);
  EXPECT_NEAR(predicate_uncertainty(0.8), 0.2, 1e-15);
  EXPECT_THROW(predicate_uncertainty(1.1), DomainError);
  EXPECT_THROW(predicate_uncertainty(-0.1), DomainError);
}

TEST(PredicateUncertainty, SymmetricExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double p = u(rng);
    EXPECT_EQ(predicate_uncertainty(p), predicate_uncertainty(1.0 - p));
  }
}

TEST(StateUncertainty, Examples) {
  ProbabilisticState s;
  EXPECT_EQ(state_uncertainty_independent(s), 0.0);
  s.set(on("a", "b"), 0.8);
  EXPECT_NEAR(state_uncertainty_independent(s), 0.2, 1e-15);
  s.set(clear("a"), 0.85);
  EXPECT_NEAR(state_uncertainty_independent(s), 1.0 - 0.8 * 0.85, 1e-15);
}

TEST(StateUncertainty, MonotoneInEntries) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto preds = all_ground_predicates({"a", "b", "c"});
  for (int trial = 0; trial < 200; ++trial) {
    ProbabilisticState s;
    double prev = 0.0;
    for (const auto& p : preds) {
      const double conf = trial % 7 == 0 ? 1.0 : u(rng);
      s.set(p, conf);
      const double now = state_uncertainty_independent(s);
      if (predicate_uncertainty(conf) > 0 && prev < 1.0) {
        EXPECT_GT(now, prev);
      }
      if (predicate_uncertainty(conf) == 0) {
        EXPECT_EQ(now, prev);
      }
      prev = now;
    }
  }
}

TEST(Classify, Examples) {
  ProbabilisticState s;
  s.set(on("a", "b"), 0.9);
  s.set(clear("a"), 0.1);
  s.set(clear("b"), 0.5);
  const auto part = classify(s, 0.7);
  EXPECT_EQ(part.certain_true, std::set<GroundPredicate>{on("a", "b")});
  EXPECT_EQ(part.certain_false, std::set<GroundPredicate>{clear("a")});
  EXPECT_EQ(part.uncertain, std::set<GroundPredicate>{clear("b")});
}

TEST(Classify, BoundaryIsUncertain) {
  ProbabilisticState s;
  s.set(clear("a"), 0.75);
  s.set(clear("b"), 0.25);
  const auto part = classify(s, 0.75);
  EXPECT_EQ(part.uncertain.size(), 2u);
  EXPECT_THROW(classify(s, 0.0), DomainError);
  EXPECT_THROW(classify(s, 1.0), DomainError);
}

TEST(Classify, PartitionsEveryState) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto preds = all_ground_predicates({"a", "b", "c", "d"});
  for (int trial = 0; trial < 300; ++trial) {
    ProbabilisticState s;
    for (const auto& p : preds) {
      if (u(rng) < 0.5) s.set(p, u(rng));
    }
    const double tau = 0.01 + 0.98 * u(rng);
    const auto part = classify(s, tau);
    EXPECT_EQ(part.certain_true.size() + part.certain_false.size() + part.uncertain.size(), s.size());
    for (const auto& [p, conf] : s.entries()) {
      const int hits = part.certain_true.count(p) + part.certain_false.count(p) + part.uncertain.count(p);
      EXPECT_EQ(hits, 1);
    }
  }
}

TEST(ReductionLaw, Examples) {
  EXPECT_NEAR(reduction_law(0.5, 0.3, 3), 0.1715, 1e-9);
  EXPECT_EQ(reduction_law(0.5, 0.3, 0), 0.5);
  EXPECT_NEAR(reduction_law(0.4, 0.5, 2), 0.1, 1e-15);
  EXPECT_THROW(reduction_law(0.5, 0.0, 1), DomainError);
  EXPECT_THROW(reduction_law(0.5, 1.0, 1), DomainError);
}

TEST(ReductionLaw, Semigroup) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double u0 = u(rng), alpha = 0.01 + 0.98 * u(rng);
    const int j = static_cast<int>(rng() % 20), k = static_cast<int>(rng() % 20);
    EXPECT_NEAR(reduction_law(u0, alpha, j + k), reduction_law(reduction_law(u0, alpha, j), alpha, k), 1e-12);
  }
}

TEST(Fuse, Examples) {
  const auto phi = on("a", "b");
  ProbabilisticState prior, obs;
  prior.set(phi, 0.6);
  obs.set(phi, 0.9);
  auto fused = fuse_observation(prior, obs);
  EXPECT_EQ(fused.confidence(phi), 0.9);
  EXPECT_TRUE(fused.is_known(phi));

  fused = fuse_observation(obs, prior);
  EXPECT_EQ(fused.confidence(phi), 0.9);

  ProbabilisticState empty, third;
  third.set(phi, 0.3);
  fused = fuse_observation(empty, third);
  EXPECT_EQ(fused.confidence(phi), 0.3);
}

TEST(Fuse, NeverIncreasesUncertaintyAndCarriesPriorOnly) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto preds = all_ground_predicates({"a", "b", "c"});
  for (int trial = 0; trial < 200; ++trial) {
    ProbabilisticState prior, obs;
    for (const auto& p : preds) {
      if (u(rng) < 0.7) prior.set(p, u(rng));
      if (u(rng) < 0.7) obs.set(p, u(rng));
    }
    const auto fused = fuse_observation(prior, obs);
    for (const auto& [p, conf] : fused.entries()) {
      const double uf = predicate_uncertainty(conf);
      if (obs.contains(p)) {
        EXPECT_LE(uf, predicate_uncertainty(*obs.confidence(p)));
        if (prior.contains(p)) {
          EXPECT_LE(uf, predicate_uncertainty(*prior.confidence(p)));
        }
        EXPECT_TRUE(fused.is_known(p));
      } else {
        EXPECT_EQ(conf, *prior.confidence(p));
      }
    }
  }
}

TEST(StateSerialization, JsonRoundTripIsLossless) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProbabilisticState s;
  for (const auto& p : all_ground_predicates({"a", "b", "c"})) s.set(p, u(rng));
  s.mark_known(on("a", "b"));
  const auto back = state_from_json(to_json(s));
  ASSERT_EQ(back.size(), s.size());
  for (const auto& [p, conf] : s.entries()) EXPECT_NEAR(*back.confidence(p), conf, 1e-12);
  EXPECT_EQ(back.known(), s.known());
  EXPECT_EQ(parse_state(dump_state(s)), back);
}

TEST(StateSerialization, RejectsOutOfRange) {
  ProbabilisticState s;
  EXPECT_THROW(s.set(clear("a"), 1.5), DomainError);
  EXPECT_THROW(s.mark_known(clear("a")), DomainError);
}
