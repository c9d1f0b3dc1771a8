#include <gtest/gtest.h>

#include <random>

#include "nsplan/blocks.hpp"
#include "nsplan/error.hpp"
#include "oracles.hpp"

using namespace nsplan;

namespace {

const GroundAction& find_action(const std::vector<GroundAction>& actions, const std::string& name,
                                const std::vector<std::string>& args) {
  for (const auto& a : actions) {
    if (a.name == name && a.args == args) return a;
  }
  throw std::runtime_error("no action " + name);
}

}  // namespace

TEST(GroundDomain, Enumeration) {
  const auto two = ground_domain({"a", "b"});
  EXPECT_NO_THROW(find_action(two, "place", {"a", "b"}));
  EXPECT_NO_THROW(find_action(two, "place", {"b", "a"}));
  EXPECT_NO_THROW(find_action(two, "look_closer", {"a"}));
  EXPECT_NO_THROW(find_action(two, "push_obstacle", {"b"}));

  for (const auto& a : ground_domain({"a"})) {
    if (a.args.size() == 2) {
      EXPECT_NE(a.args[0], a.args[1]);
    }
  }
  EXPECT_THROW(ground_domain({}), DomainError);
}

TEST(GroundDomain, QuadraticGrowthAndInfoShape) {
  for (std::size_t n = 1; n <= 8; ++n) {
    std::vector<std::string> objs;
    for (std::size_t i = 0; i < n; ++i) objs.push_back(oracle::block_name(static_cast<int>(i)));
    // pick + putdown per object, unstack + place per ordered pair
    EXPECT_EQ(manipulation_actions(objs).size(), 2 * n + 2 * n * (n - 1));
    for (const auto& a : ground_domain(objs)) {
      if (a.is_info()) {
        EXPECT_TRUE(a.add.empty());
        EXPECT_TRUE(a.del.empty());
      }
    }
  }
}

TEST(Apply, Examples) {
  const auto domain = ground_domain({"a", "b"});
  auto s = flat_world({"a", "b"});
  s = apply(s, find_action(domain, "pick", {"a"}));
  EXPECT_TRUE(s.contains(atoms::holding("a")));
  EXPECT_FALSE(s.contains(atoms::hand_empty()));
  EXPECT_TRUE(s.is_valid());

  s = apply(s, find_action(domain, "place", {"a", "b"}));
  EXPECT_TRUE(s.contains(atoms::on("a", "b")));
  EXPECT_TRUE(s.contains(atoms::clear("a")));
  EXPECT_TRUE(s.contains(atoms::hand_empty()));
  EXPECT_TRUE(s.is_valid());

  auto holding_b = apply(flat_world({"a", "b"}), find_action(domain, "pick", {"b"}));
  EXPECT_THROW(apply(holding_b, find_action(domain, "pick", {"a"})), InapplicableError);
}

TEST(Apply, RandomWalksStayValid) {
  std::mt19937_64 rng(6);
  const std::vector<std::string> objs{"a", "b", "c", "d"};
  const auto actions = manipulation_actions(objs);
  for (int walk = 0; walk < 100; ++walk) {
    auto s = flat_world(objs);
    for (int step = 0; step < 30; ++step) {
      std::vector<const GroundAction*> ok;
      for (const auto& a : actions) {
        if (applicable(s, a)) ok.push_back(&a);
      }
      ASSERT_FALSE(ok.empty());
      s = apply(s, *ok[std::uniform_int_distribution<std::size_t>(0, ok.size() - 1)(rng)]);
      ASSERT_TRUE(s.is_valid()) << s.to_string();
    }
  }
}

TEST(WorldState, Validity) {
  EXPECT_TRUE(flat_world({"a", "b"}).is_valid());
  SymbolicWorldState two_hands({atoms::hand_empty(), atoms::holding("a")});
  EXPECT_FALSE(two_hands.is_valid());
  SymbolicWorldState cycle({atoms::hand_empty(), atoms::on("a", "b"), atoms::on("b", "a")});
  EXPECT_FALSE(cycle.is_valid());
  SymbolicWorldState held_on({atoms::holding("a"), atoms::on_table("a")});
  EXPECT_FALSE(held_on.is_valid());
}

TEST(Goal, ParseAndValidate) {
  const auto g = parse_goal("On(a,b) & On(b,c)");
  EXPECT_EQ(g.atoms.size(), 2u);
  EXPECT_EQ(g.objects(), (std::set<std::string>{"a", "b", "c"}));
  EXPECT_EQ(parse_goal(g.to_string()).atoms, g.atoms);
  EXPECT_THROW(parse_goal("On(a,b) & Clear(b)"), DomainError);
  EXPECT_THROW(parse_goal("LeftOf(a,b)"), DomainError);
  EXPECT_THROW(parse_goal(""), DomainError);
}

TEST(Heuristic, Examples) {
  const std::vector<std::string> objs{"a", "b", "c"};
  auto flat = flat_world(objs);
  EXPECT_EQ(heuristic_unsat(flat, parse_goal("Clear(a)")), 0);
  EXPECT_EQ(heuristic_unsat(flat, parse_goal("On(a,b) & On(b,c)")), 2);
  SymbolicWorldState blocked({atoms::hand_empty(), atoms::on("b", "a"), atoms::on_table("a"), atoms::clear("b")});
  EXPECT_EQ(heuristic_unsat(blocked, parse_goal("Clear(a)")), 1);
}

TEST(Heuristic, AdmissibleAgainstBfs) {
  std::mt19937_64 rng(12);
  int checked = 0;
  while (checked < 1000) {
    const int n = std::uniform_int_distribution<int>(2, 5)(rng);
    const auto below = oracle::random_blocks(n, rng, true);
    const auto goal = oracle::random_goal(n, rng);
    const auto dist = oracle::bfs_plan_length(below, goal);
    if (!dist) continue;
    EXPECT_LE(heuristic_unsat(oracle::to_world(below), oracle::to_goal(goal)), *dist);
    ++checked;
  }
}

TEST(Astar, Examples) {
  const auto flat = flat_world({"a", "b", "c"});
  const auto stack = astar(flat, parse_goal("On(a,b) & On(b,c)"));
  ASSERT_TRUE(stack.plan);
  EXPECT_EQ(stack.plan->size(), 4u);

  const auto done = astar(flat, parse_goal("Clear(a)"));
  ASSERT_TRUE(done.plan);
  EXPECT_TRUE(done.plan->empty());

  Goal cyclic;
  cyclic.atoms = {atoms::on("a", "b"), atoms::on("b", "a")};
  EXPECT_FALSE(astar(flat, cyclic).plan);
}

TEST(Astar, ExpansionCap) {
  const auto flat = flat_world({"a", "b", "c", "d"});
  EXPECT_THROW(astar(flat, parse_goal("On(a,b) & On(b,c) & On(c,d)"), 2), CapacityError);
}

TEST(Astar, PlansAreOptimalAndExecutable) {
  std::mt19937_64 rng(21);
  int checked = 0;
  while (checked < 150) {
    const int n = std::uniform_int_distribution<int>(2, 5)(rng);
    const auto below = oracle::random_blocks(n, rng, false);
    const auto goal = oracle::random_goal(n, rng);
    const auto dist = oracle::bfs_plan_length(below, goal);
    if (!dist) continue;
    const auto init = oracle::to_world(below);
    const auto g = oracle::to_goal(goal);
    const auto res = astar(init, g);
    ASSERT_TRUE(res.plan);
    EXPECT_EQ(static_cast<int>(res.plan->size()), *dist);
    auto s = init;
    for (const auto& a : *res.plan) s = apply(s, a);
    EXPECT_TRUE(g.satisfied_by(s));
    ++checked;
  }
}

TEST(Astar, Deterministic) {
  const auto flat = flat_world({"a", "b", "c", "d"});
  const auto g = parse_goal("On(c,a) & On(d,b)");
  const auto first = astar(flat, g);
  const auto second = astar(flat, g);
  ASSERT_TRUE(first.plan && second.plan);
  EXPECT_EQ(*first.plan, *second.plan);
  EXPECT_EQ(first.expansions, second.expansions);
}

TEST(Execute, GraspsFromActualSupport) {
  // belief thought c was on the table; it actually sits on a
  SymbolicWorldState truth({atoms::hand_empty(), atoms::on("c", "a"), atoms::on_table("a"), atoms::on_table("b"),
                            atoms::clear("c"), atoms::clear("b")});
  const auto domain = ground_domain({"a", "b", "c"});
  const Plan plan{find_action(domain, "pick", {"c"}), find_action(domain, "place", {"c", "b"})};
  const auto res = execute_in_world(truth, plan);
  EXPECT_TRUE(res.completed);
  EXPECT_TRUE(res.final_state.contains(atoms::on("c", "b")));
  EXPECT_TRUE(res.final_state.contains(atoms::clear("a")));
  EXPECT_TRUE(res.final_state.is_valid());

  const Plan blocked{find_action(domain, "pick", {"a"})};
  const auto stop = execute_in_world(truth, blocked);
  EXPECT_FALSE(stop.completed);
  EXPECT_EQ(stop.executed, 0u);
}
