#include <gtest/gtest.h>

#include <cmath>

#include "bfs3/fsss.hpp"
#include "bfs3/tabular_mdp.hpp"

namespace bfs3 {
namespace {

// State 0 pulls arm a for reward rewards[a]; every arm ends the episode.
TabularMDP bandit(const std::vector<double>& rewards) {
  const int A = static_cast<int>(rewards.size());
  TabularMDP mdp(2, A, 0.9, 0.0, 1.0);
  for (ActionId a = 0; a < A; ++a) mdp.set_transition(0, a, {{1, 1.0}}, rewards[static_cast<std::size_t>(a)]);
  mdp.set_terminal(1);
  return mdp;
}

// Exact d-step optimal return of a deterministic MDP by recursion.
double deterministic_horizon_value(const TabularMDP& mdp, StateId s, int d) {
  if (d == 0 || mdp.is_terminal(s)) return 0.0;
  double best = -1e300;
  for (ActionId a = 0; a < mdp.num_actions(); ++a) {
    const StateId next = mdp.row(s, a)[0].next;
    best = std::max(best, mdp.reward(s, a) + mdp.discount() * deterministic_horizon_value(mdp, next, d - 1));
  }
  return best;
}

TabularMDP random_deterministic(int S, int A, std::uint64_t seed) {
  Rng rng(seed);
  TabularMDP mdp(S, A, 0.9, 0.0, 1.0);
  std::uniform_int_distribution<int> state(0, S - 1);
  std::uniform_real_distribution<double> reward(0.0, 1.0);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) mdp.set_transition(s, a, {{state(rng), 1.0}}, reward(rng));
  }
  return mdp;
}

TEST(Fsss, TerminalRootIsZeroWithoutQueries) {
  const auto mdp = bandit({0.3, 0.6});
  Rng rng(1);
  const auto est = fsss_estimate<StateId>(1, FsssParams{3, 10, 2, true}, mdp, rng);
  EXPECT_EQ(est.value, 0.0);
  EXPECT_EQ(est.tree.query_count(), 0);
}

TEST(Fsss, DepthOneBanditIsExactAfterARollouts) {
  const auto mdp = bandit({0.2, 0.9, 0.5});
  Rng rng(2);
  const auto est = fsss_estimate<StateId>(0, FsssParams{1, 3, 2, false}, mdp, rng);
  EXPECT_DOUBLE_EQ(est.value, 0.9);
  EXPECT_EQ(est.tree.root()->upper, est.tree.root()->lower);
}

TEST(Fsss, ConvergesToSparseSamplingOnSharedTree) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto mdp = random_tabular_mdp(5, 2, seed, 2, 0.8);
    const FsssParams p{3, 64, 2, true};  // t = (A*C)^d
    Rng rng(seed);
    const auto est = fsss_estimate<StateId>(0, p, mdp, rng);
    EXPECT_EQ(est.tree.root()->upper, est.tree.root()->lower);
    Rng ss_rng(seed + 1000);
    SharedTreeSparseSampling<StateId> ss(est.tree, mdp, ss_rng);
    const auto exact = ss.root();
    EXPECT_NEAR(est.value, exact.value, 1e-9);
    EXPECT_EQ(best_root_action(est.tree), exact.best_action);
  }
}

TEST(Fsss, FirstRolloutIssuesACQueries) {
  const auto mdp = random_tabular_mdp(5, 3, 4, 2);
  Fsss<StateId> search(mdp, FsssParams{1, 1, 4, false}, 0);
  Rng rng(3);
  search.rollout(rng);
  EXPECT_EQ(search.tree().query_count(), 3 * 4);
}

TEST(Fsss, RolloutOnClosedTreeChangesNothing) {
  const auto mdp = random_tabular_mdp(4, 2, 5, 2);
  Fsss<StateId> search(mdp, FsssParams{2, 1000, 2, true}, 0);
  Rng rng(4);
  search.run(rng);
  ASSERT_TRUE(search.converged());
  std::vector<std::pair<double, double>> before;
  for (const auto* n : search.tree().nodes()) before.emplace_back(n->upper, n->lower);
  const auto queries = search.tree().query_count();
  search.rollout(rng);
  ASSERT_EQ(before.size(), search.tree().nodes().size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(search.tree().nodes()[i]->upper, before[i].first);
    EXPECT_EQ(search.tree().nodes()[i]->lower, before[i].second);
  }
  EXPECT_EQ(search.tree().query_count(), queries);
}

TEST(Fsss, RootBoundsAreMonotone) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto mdp = random_tabular_mdp(2 + static_cast<int>(seed % 5), 2 + static_cast<int>(seed % 2), seed, 2);
    Fsss<StateId> search(mdp, FsssParams{4, 50, 2, false}, 0);
    Rng rng(seed);
    double u = search.tree().root()->upper;
    double l = search.tree().root()->lower;
    for (int k = 0; k < 50; ++k) {
      search.rollout(rng);
      const auto* root = search.tree().root();
      ASSERT_LE(root->upper, u);
      ASSERT_GE(root->lower, l);
      ASSERT_LE(root->lower, root->upper);
      u = root->upper;
      l = root->lower;
    }
  }
}

TEST(Fsss, EstimateStaysWithinQueryBudget) {
  const auto mdp = random_tabular_mdp(6, 3, 6, 3);
  const FsssParams p{5, 7, 3, false};
  Rng rng(6);
  const auto est = fsss_estimate<StateId>(0, p, mdp, rng);
  EXPECT_LE(est.tree.query_count(), p.query_budget(3));
}

TEST(BellmanBackup, TerminalChildrenGiveImmediateReward) {
  SearchNode<StateId> leaf;
  leaf.terminal = true;
  SearchNode<StateId> node;
  node.visited = true;
  node.edges.resize(1);
  node.edges[0].mean_reward = 0.4;
  node.edges[0].children = {{&leaf, 2}};
  bellman_backup(node, 0.9, 2, ValueBounds{-10, 10});
  EXPECT_DOUBLE_EQ(node.edges[0].upper, 0.4);
  EXPECT_DOUBLE_EQ(node.edges[0].lower, 0.4);
}

TEST(BellmanBackup, CountWeightedChildren) {
  SearchNode<StateId> a;
  a.upper = 2.0;
  SearchNode<StateId> b;
  b.upper = 4.0;
  SearchNode<StateId> node;
  node.edges.resize(1);
  node.edges[0].mean_reward = 1.0;
  node.edges[0].children = {{&a, 1}, {&b, 1}};
  bellman_backup(node, 0.9, 2, ValueBounds{-100, 100});
  EXPECT_NEAR(node.edges[0].upper, 3.7, 1e-12);
  EXPECT_NEAR(node.upper, 3.7, 1e-12);
}

TEST(SparseSampling, DepthZeroIsLeafValue) {
  const auto mdp = random_tabular_mdp(3, 2, 7, 2);
  Rng rng(7);
  EXPECT_EQ(sparse_sampling_exact<StateId>(0, 0, 2, mdp, rng).value, 0.0);
}

TEST(SparseSampling, DeterministicMdpGivesExactHorizonValue) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto mdp = random_deterministic(4, 3, seed);
    Rng rng(seed);
    EXPECT_NEAR(sparse_sampling_exact<StateId>(0, 4, 1, mdp, rng).value, deterministic_horizon_value(mdp, 0, 4),
                1e-12);
  }
}

TEST(SparseSampling, RejectsHugeTrees) {
  const auto mdp = random_tabular_mdp(3, 4, 8, 2);
  Rng rng(8);
  EXPECT_THROW(sparse_sampling_exact<StateId>(0, 12, 4, mdp, rng), std::invalid_argument);
}

TEST(BestRootAction, SingleActionIsZero) {
  const auto mdp = bandit({0.5});
  Rng rng(9);
  const auto est = fsss_estimate<StateId>(0, FsssParams{1, 5, 1, true}, mdp, rng);
  EXPECT_EQ(best_root_action(est.tree), 0);
}

TEST(BestRootAction, DominantArm) {
  const auto mdp = bandit({0.1, 0.9});
  Rng rng(10);
  const auto est = fsss_estimate<StateId>(0, FsssParams{1, 5, 1, true}, mdp, rng);
  EXPECT_EQ(best_root_action(est.tree), 1);
}

TEST(BestRootAction, UnexpandedRootThrows) {
  const auto mdp = bandit({0.1, 0.9});
  Fsss<StateId> search(mdp, FsssParams{1, 1, 1, true}, 0);
  EXPECT_THROW(best_root_action(search.tree()), std::logic_error);
}

TEST(FsssParams, Validation) {
  EXPECT_THROW((FsssParams{0, 1, 1, true}.validate()), std::invalid_argument);
  EXPECT_EQ((FsssParams{3, 5, 2, true}.query_budget(4)), 5 * 3 * 4 * 2);
}

}  // namespace
}  // namespace bfs3
