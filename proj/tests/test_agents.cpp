#include <gtest/gtest.h>

#include <memory>

#include "bfs3/agents.hpp"

namespace bfs3 {
namespace {

std::shared_ptr<const BeliefMDP> fdm_belief(const TabularMDP& mdp, int cap) {
  const int S = mdp.num_states();
  auto prior = std::make_shared<const FdmPrior>(S, mdp.num_actions(), FdmPrior::symmetric_alpha(S, 1.0 / S),
                                                KnownRewards::from(mdp), cap, DomainSpec::from(mdp).terminal,
                                                mdp.discount());
  return std::make_shared<const BeliefMDP>(prior, DomainSpec::from(mdp));
}

std::vector<bool> terminals(const TabularMDP& mdp) { return DomainSpec::from(mdp).terminal; }

// Deterministic chain 0 -> 1 -> 2 (terminal) on action 1; action 0 stays.
TabularMDP chain() {
  TabularMDP mdp(3, 2, 0.9, 0.0, 1.0);
  mdp.set_transition(0, 0, {{0, 1.0}}, 0.1);
  mdp.set_transition(0, 1, {{1, 1.0}}, 0.0);
  mdp.set_transition(1, 0, {{1, 1.0}}, 0.1);
  mdp.set_transition(1, 1, {{2, 1.0}}, 1.0);
  mdp.set_terminal(2);
  return mdp;
}

TEST(Bfs3Planner, SecondCallHitsCache) {
  const auto mdp = random_tabular_mdp(4, 2, 1, 2);
  const auto belief = fdm_belief(mdp, 5);
  Bfs3Planner<BeliefState> planner(*belief, FsssParams{3, 10, 2, true});
  Rng rng(1);
  const auto b = belief->initial_belief(0);
  const auto first = planner.decide(b, rng);
  EXPECT_FALSE(first.cache_hit);
  EXPECT_GT(first.queries, 0);
  const auto second = planner.decide(b, rng);
  EXPECT_TRUE(second.cache_hit);
  EXPECT_EQ(second.queries, 0);
  EXPECT_EQ(second.action, first.action);
  EXPECT_EQ(planner.cache_hits(), 1);
}

TEST(Bfs3Planner, FreshDecisionWithinBudget) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto mdp = random_tabular_mdp(5, 3, seed, 2);
    const auto belief = fdm_belief(mdp, 4);
    Bfs3Planner<BeliefState> planner(*belief, FsssParams{4, 5, 2, false});
    Rng rng(seed);
    const auto d = planner.decide(belief->initial_belief(0), rng);
    EXPECT_LE(d.queries, planner.decision_budget());
  }
}

TEST(Bfs3Planner, PointMassMatchesPlannerOnRawMdp) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto mdp = random_tabular_mdp(5, 3, seed, 2, 0.8);
    const BeliefMDP belief(std::make_shared<const PointMassPrior>(mdp), DomainSpec::from(mdp));
    const FsssParams p{3, 20, 2, true};
    Bfs3Planner<StateId> raw(mdp, p);
    Bfs3Planner<BeliefState> bayes(belief, p);
    Rng r1(seed), r2(seed);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
      const auto a = raw.decide(s, r1);
      const auto b = bayes.decide(belief.initial_belief(s), r2);
      EXPECT_EQ(a.action, b.action);
      EXPECT_EQ(a.q_upper, b.q_upper);
    }
  }
}

TEST(Bfs3Planner, PointMassAgreesWithValueIteration) {
  int agree = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto mdp = random_tabular_mdp(3 + static_cast<int>(seed % 4), 2, seed, 2, 0.8);
    const auto policy = greedy_policy(mdp, value_iteration(mdp, 1e-10).V);
    Bfs3Planner<StateId> planner(mdp, FsssParams{8, 2000, 8, true});
    Rng rng(seed);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
      ++total;
      agree += planner.decide(s, rng).action == policy[static_cast<std::size_t>(s)];
    }
  }
  EXPECT_GE(agree, 0.95 * total) << agree << "/" << total;
}

TEST(Bfs3Agent, ObserveAdvancesBelief) {
  const auto mdp = chain();
  const auto belief = fdm_belief(mdp, 3);
  Bfs3Agent agent(belief, FsssParams{3, 10, 1, true});
  Rng rng(2);
  agent.begin_episode(0);
  const ActionId a = agent.act(0, rng);
  const StateId next = mdp.row(0, a)[0].next;
  agent.observe(0, a, next, mdp.reward(0, a));
  EXPECT_EQ(agent.belief().real_state, next);
  EXPECT_EQ(agent.belief().stats.total(0, a), 1);
  EXPECT_EQ(agent.discoveries(), 1);
}

TEST(BebBonus, Values) {
  EXPECT_DOUBLE_EQ(beb_bonus_reward(0.5, 0, 2.0), 2.5);
  EXPECT_NEAR(beb_bonus_reward(0.5, 1000000000, 2.0), 0.5, 1e-8);
  EXPECT_DOUBLE_EQ(beb_bonus_reward(0.5, 3, 0.0), 0.5);
}

TEST(BebAgent, UnvisitedPicksBestReward) {
  TabularMDP mdp(2, 3, 0.9, 0.0, 1.0);
  mdp.set_transition(0, 0, {{1, 1.0}}, 0.2);
  mdp.set_transition(0, 1, {{1, 1.0}}, 0.7);
  mdp.set_transition(0, 2, {{1, 1.0}}, 0.4);
  BebAgent agent(2, 3, 0.9, KnownRewards::from(mdp), 2.0, terminals(mdp));
  Rng rng(3);
  EXPECT_EQ(agent.act(0, rng), 1);
}

TEST(BebAgent, LearnedModelZeroBonusIsOptimal) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TabularMDP mdp(5, 3, 0.9, 0.0, 1.0);
    Rng gen(seed);
    std::uniform_int_distribution<int> state(0, 4);
    std::uniform_real_distribution<double> reward(0.0, 1.0);
    for (StateId s = 0; s < 5; ++s) {
      for (ActionId a = 0; a < 3; ++a) mdp.set_transition(s, a, {{state(gen), 1.0}}, reward(gen));
    }
    const auto vt = value_iteration(mdp, 1e-10);
    BebAgent agent(5, 3, 0.9, KnownRewards::from(mdp), 0.0, terminals(mdp));
    for (StateId s = 0; s < 5; ++s) {
      for (ActionId a = 0; a < 3; ++a) agent.observe(s, a, mdp.row(s, a)[0].next, mdp.reward(s, a));
    }
    Rng rng(seed);
    for (StateId s = 0; s < 5; ++s) {
      // Compare values rather than indices so exact ties cannot fail the test.
      const ActionId a = agent.act(s, rng);
      EXPECT_NEAR(vt.q(s, a), vt.V[static_cast<std::size_t>(s)], 1e-6);
    }
  }
}

TEST(BebAgent, RejectsUnknownRewards) {
  EXPECT_THROW(BebAgent(2, 2, 0.9, DpRewardPrior{}, 1.0, {false, false}), std::invalid_argument);
}

TEST(RmaxAgent, AllUnknownPicksActionZero) {
  RmaxAgent agent(4, 3, 0.9, 1.0, 5, std::vector<bool>(4, false));
  Rng rng(4);
  for (StateId s = 0; s < 4; ++s) EXPECT_EQ(agent.act(s, rng), 0);
}

TEST(RmaxAgent, KnownTruthIsOptimal) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TabularMDP mdp(5, 2, 0.9, 0.0, 1.0);
    Rng gen(seed);
    std::uniform_int_distribution<int> state(0, 4);
    std::uniform_real_distribution<double> reward(0.0, 1.0);
    for (StateId s = 0; s < 5; ++s) {
      for (ActionId a = 0; a < 2; ++a) mdp.set_transition(s, a, {{state(gen), 1.0}}, reward(gen));
    }
    const auto vt = value_iteration(mdp, 1e-10);
    RmaxAgent agent(5, 2, 0.9, 1.0, 3, terminals(mdp));
    for (int k = 0; k < 3; ++k) {
      for (StateId s = 0; s < 5; ++s) {
        for (ActionId a = 0; a < 2; ++a) agent.observe(s, a, mdp.row(s, a)[0].next, mdp.reward(s, a));
      }
    }
    EXPECT_EQ(agent.discoveries(), 5 * 2 * 3);
    Rng rng(seed);
    for (StateId s = 0; s < 5; ++s) {
      ASSERT_TRUE(agent.known(s, 0) && agent.known(s, 1));
      const ActionId a = agent.act(s, rng);
      EXPECT_NEAR(vt.q(s, a), vt.V[static_cast<std::size_t>(s)], 1e-6);
    }
  }
}

TEST(RmaxAgent, CountsStopAtM) {
  RmaxAgent agent(2, 1, 0.9, 1.0, 2, {false, false});
  for (int k = 0; k < 5; ++k) agent.observe(0, 0, 1, 0.0);
  EXPECT_EQ(agent.count(0, 0), 2);
  EXPECT_EQ(agent.discoveries(), 2);
}

TEST(RandomAgent, CoversActionsUniformly) {
  RandomAgent<StateId> agent(4);
  Rng rng(5);
  std::vector<int> n(4, 0);
  for (int k = 0; k < 40000; ++k) ++n[static_cast<std::size_t>(agent.act(0, rng))];
  for (int x : n) EXPECT_NEAR(x / 40000.0, 0.25, 0.01);
}

}  // namespace
}  // namespace bfs3
