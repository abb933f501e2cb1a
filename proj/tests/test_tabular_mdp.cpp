#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "bfs3/tabular_mdp.hpp"

namespace bfs3 {
namespace {

// Finite-horizon backups from V = 0, independent of value_iteration's loop.
std::vector<double> horizon_backup(const TabularMDP& mdp, int H) {
  std::vector<double> V(static_cast<std::size_t>(mdp.num_states()), 0.0);
  for (int h = 0; h < H; ++h) {
    std::vector<double> next(V.size());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
      double best = -1e300;
      for (ActionId a = 0; a < mdp.num_actions(); ++a) {
        double q = mdp.reward(s, a);
        for (const auto& o : mdp.row(s, a)) q += mdp.discount() * o.prob * V[static_cast<std::size_t>(o.next)];
        best = std::max(best, q);
      }
      next[static_cast<std::size_t>(s)] = best;
    }
    V = next;
  }
  return V;
}

TEST(BellmanQ, TerminalSelfLoopWithZeroRewardIsZero) {
  TabularMDP mdp(2, 2, 0.9, 0.0, 1.0);
  mdp.set_transition(1, 0, {{0, 1.0}}, 1.0);
  mdp.set_terminal(1);
  const std::vector<double> V{0.0, 0.0};
  EXPECT_EQ(bellman_q(mdp, V, 1, 0), 0.0);
  Rng rng(1);
  const auto t = mdp.sample(1, 0, rng);
  EXPECT_EQ(t.next, 1);
  EXPECT_EQ(t.reward, 0.0);
}

TEST(BellmanQ, ZeroDiscountReturnsReward) {
  TabularMDP mdp(2, 1, 0.0, 0.0, 1.0);
  mdp.set_transition(0, 0, {{1, 1.0}}, 0.7);
  const std::vector<double> V{5.0, 9.0};
  EXPECT_EQ(bellman_q(mdp, V, 0, 0), 0.7);
}

TEST(BellmanQ, TwoStateChain) {
  TabularMDP mdp(2, 1, 0.9, 0.0, 1.0);
  mdp.set_transition(0, 0, {{1, 1.0}}, 1.0);
  const std::vector<double> V{0.0, 2.0};
  EXPECT_NEAR(bellman_q(mdp, V, 0, 0), 2.8, 1e-12);
}

TEST(ValueIteration, SingleStateGeometricSeries) {
  TabularMDP mdp(1, 1, 0.5, 0.0, 1.0);
  mdp.set_transition(0, 0, {{0, 1.0}}, 1.0);
  const auto vt = value_iteration(mdp, 1e-8);
  EXPECT_NEAR(vt.V[0], 2.0, 1e-8);
}

TEST(ValueIteration, ZeroRewardsGiveZeroValues) {
  auto mdp = random_tabular_mdp(5, 3, 3, 2, 0.9);
  TabularMDP zero(5, 3, 0.9, 0.0, 1.0);
  for (StateId s = 0; s < 5; ++s) {
    for (ActionId a = 0; a < 3; ++a) {
      auto row = mdp.row(s, a);
      zero.set_transition(s, a, {row.begin(), row.end()}, 0.0);
    }
  }
  for (double v : value_iteration(zero, 1e-6).V) EXPECT_EQ(v, 0.0);
}

TEST(ValueIteration, MatchesLongHorizonBackup) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto mdp = random_tabular_mdp(5, 3, seed, 2, 0.9);
    const double eps = 1e-6;
    const int H = static_cast<int>(std::ceil(std::log(eps * (1 - 0.9) / mdp.r_max()) / std::log(0.9)));
    const auto oracle = horizon_backup(mdp, H);
    const auto vt = value_iteration(mdp, eps);
    for (std::size_t s = 0; s < oracle.size(); ++s) EXPECT_NEAR(vt.V[s], oracle[s], 2 * eps) << "seed " << seed;
  }
}

TEST(ValueIteration, RejectsBadArguments) {
  EXPECT_THROW(TabularMDP(1, 1, 1.0, 0.0, 1.0), std::invalid_argument);
  TabularMDP mdp(1, 1, 0.5, 0.0, 1.0);
  EXPECT_THROW(value_iteration(mdp, 0.0), std::invalid_argument);
}

TEST(GreedyPolicy, SingleActionIsZero) {
  const auto mdp = random_tabular_mdp(4, 1, 1, 2);
  for (ActionId a : greedy_policy(mdp, value_iteration(mdp, 1e-6).V)) EXPECT_EQ(a, 0);
}

TEST(GreedyPolicy, ExactTieGoesToLowestAction) {
  TabularMDP mdp(2, 2, 0.9, 0.0, 1.0);
  mdp.set_transition(0, 0, {{1, 1.0}}, 0.5);
  mdp.set_transition(0, 1, {{1, 1.0}}, 0.5);
  const std::vector<double> V{0.0, 1.0};
  EXPECT_EQ(greedy_policy(mdp, V)[0], 0);
}

TEST(GreedyPolicy, CorridorPointsTowardGoalByEnumeration) {
  // 0 - 1 - 2(goal, terminal); action 0 left, action 1 right.
  TabularMDP mdp(3, 2, 0.9, 0.0, 1.0);
  mdp.set_transition(0, 0, {{0, 1.0}}, 0.0);
  mdp.set_transition(0, 1, {{1, 1.0}}, 0.0);
  mdp.set_transition(1, 0, {{0, 1.0}}, 0.0);
  mdp.set_transition(1, 1, {{2, 1.0}}, 1.0);
  mdp.set_terminal(2);
  // Best of all four deterministic policies on the two live states.
  Policy best;
  double best_value = -1.0;
  for (ActionId a0 = 0; a0 < 2; ++a0) {
    for (ActionId a1 = 0; a1 < 2; ++a1) {
      const Policy p{a0, a1, 0};
      const auto v = evaluate_policy(mdp, p);
      if (v[0] + v[1] > best_value) {
        best_value = v[0] + v[1];
        best = p;
      }
    }
  }
  const auto greedy = greedy_policy(mdp, value_iteration(mdp, 1e-10).V);
  EXPECT_EQ(greedy[0], best[0]);
  EXPECT_EQ(greedy[1], best[1]);
  EXPECT_EQ(greedy[0], 1);
  EXPECT_EQ(greedy[1], 1);
}

TEST(RandomTabularMdp, SingleStateSingleActionIsSelfLoop) {
  const auto mdp = random_tabular_mdp(1, 1, 42, 1);
  ASSERT_EQ(mdp.row(0, 0).size(), 1u);
  EXPECT_EQ(mdp.row(0, 0)[0].next, 0);
  EXPECT_DOUBLE_EQ(mdp.row(0, 0)[0].prob, 1.0);
}

TEST(RandomTabularMdp, SameSeedSameModel) {
  EXPECT_EQ(random_tabular_mdp(6, 3, 99, 2), random_tabular_mdp(6, 3, 99, 2));
  EXPECT_FALSE(random_tabular_mdp(6, 3, 99, 2) == random_tabular_mdp(6, 3, 100, 2));
}

TEST(RandomTabularMdp, RowsSumToOne) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto mdp = random_tabular_mdp(2 + static_cast<int>(seed % 7), 1 + static_cast<int>(seed % 3), seed, 2);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
      for (ActionId a = 0; a < mdp.num_actions(); ++a) {
        double sum = 0.0;
        for (const auto& o : mdp.row(s, a)) sum += o.prob;
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
  }
}

TEST(TabularMdp, RejectsBadRows) {
  TabularMDP mdp(2, 1, 0.9, 0.0, 1.0);
  EXPECT_THROW(mdp.set_transition(0, 0, {{1, 0.5}}, 0.0), std::invalid_argument);
  EXPECT_THROW(mdp.set_transition(0, 0, {{2, 1.0}}, 0.0), std::invalid_argument);
  EXPECT_THROW(mdp.set_transition(0, 0, {{1, 1.0}}, 2.0), std::invalid_argument);
}

TEST(TabularMdp, SampleFrequenciesMatchRow) {
  TabularMDP mdp(3, 1, 0.9, 0.0, 1.0);
  mdp.set_transition(0, 0, {{0, 0.2}, {1, 0.5}, {2, 0.3}}, 0.0);
  Rng rng(5);
  std::vector<int> n(3, 0);
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) ++n[static_cast<std::size_t>(mdp.sample(0, 0, rng).next)];
  EXPECT_NEAR(n[0] / double(kDraws), 0.2, 0.01);
  EXPECT_NEAR(n[1] / double(kDraws), 0.5, 0.01);
  EXPECT_NEAR(n[2] / double(kDraws), 0.3, 0.01);
}

TEST(TabularMdp, TextRoundTrip) {
  auto mdp = random_tabular_mdp(4, 2, 8, 2);
  mdp.set_terminal(3);
  std::stringstream ss;
  write_tabular_mdp(ss, mdp);
  EXPECT_EQ(read_tabular_mdp(ss), mdp);
}

}  // namespace
}  // namespace bfs3
