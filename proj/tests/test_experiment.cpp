#include <gtest/gtest.h>

#include <sstream>

#include "bfs3/experiment.hpp"
#include "bfs3/grid_world.hpp"

namespace bfs3 {
namespace {

std::string csv_of(const ExperimentConfig& c) {
  std::ostringstream os;
  write_csv(os, run_experiment(c), false);
  return os.str();
}

TEST(Experiment, ZeroStepsWritesOnlyHeader) {
  ExperimentConfig c;
  c.max_steps = 0;
  EXPECT_EQ(csv_of(c), std::string(kCsvHeader) + "\n");
}

TEST(Experiment, SameConfigSameBytes) {
  ExperimentConfig c;
  c.runs = 2;
  c.episodes = 2;
  c.fsss = {5, 10, 1, true};
  c.seed = 3;
  EXPECT_EQ(csv_of(c), csv_of(c));
  auto other = c;
  other.seed = 4;
  EXPECT_NE(csv_of(c), csv_of(other));
}

TEST(Experiment, ThreadCountDoesNotChangeOutput) {
  ExperimentConfig c;
  c.agent = "rmax";
  c.runs = 4;
  c.episodes = 2;
  c.seed = 5;
  auto threaded = c;
  threaded.threads = 2;
  EXPECT_EQ(csv_of(c), csv_of(threaded));
}

TEST(Experiment, RecordsAreConsistent) {
  ExperimentConfig c;
  c.agent = "random";
  c.runs = 2;
  c.episodes = 3;
  c.max_steps = 50;
  const auto records = run_experiment(c);
  double cum = 0.0;
  int run = 0;
  for (const auto& r : records) {
    if (r.run != run) {
      run = r.run;
      cum = 0.0;
    }
    cum += r.reward;
    EXPECT_DOUBLE_EQ(r.cum_reward, cum);
    EXPECT_EQ(r.queries, 0);
  }
  const auto returns = episode_returns(records, 2, 3);
  ASSERT_EQ(returns.size(), 2u);
  ASSERT_EQ(returns[0].size(), 3u);
}

TEST(Experiment, UnknownNamesThrow) {
  ExperimentConfig c;
  c.agent = "qlearning";
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
  c.agent = "bfs3";
  c.domain = "maze";
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
  c.domain = "wumpus4";
  c.agent = "rmax";
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
}

TEST(Experiment, PointMassBfs3NearOptimalOnGrid) {
  // Oracle: Monte-Carlo return of the value-iteration greedy policy.
  const auto grid = make_grid_world();
  const auto policy = greedy_policy(grid, value_iteration(grid, 1e-10).V);
  Rng rng(6);
  double optimal = 0.0;
  constexpr int kEpisodes = 20000;
  for (int e = 0; e < kEpisodes; ++e) {
    StateId s = 0;
    for (int k = 0; k < 200 && !grid.is_terminal(s); ++k) {
      const auto t = grid.sample(s, policy[static_cast<std::size_t>(s)], rng);
      optimal += t.reward / kEpisodes;
      s = t.next;
    }
  }
  ExperimentConfig c;
  c.prior = "pointmass";
  c.fsss = {15, 500, 8, true};
  c.runs = 2;
  c.episodes = 40;
  c.seed = 7;
  const auto rows = aggregate(run_experiment(c), c.runs, c.episodes);
  double mean = 0.0;
  for (const auto& r : rows) mean += r.stats.mean / static_cast<double>(rows.size());
  EXPECT_NEAR(mean, optimal, 0.1 * std::abs(optimal)) << "optimal " << optimal;
}

TEST(Summary, SingleValue) {
  const auto s = summarize({3.5});
  EXPECT_EQ(s.n, 1);
  EXPECT_EQ(s.mean, 3.5);
  EXPECT_EQ(s.std_error, 0.0);
}

TEST(Summary, TwoValues) {
  const auto s = summarize({0.0, 1.0});
  EXPECT_DOUBLE_EQ(s.mean, 0.5);
  EXPECT_DOUBLE_EQ(s.std_error, 0.5);
}

TEST(Sweep, SortsByValue) {
  std::vector<SweepRow> rows{{"t", 500, {}, 0}, {"t", 20, {}, 0}, {"t", 100, {}, 0}};
  sort_sweep(rows);
  EXPECT_EQ(rows[0].value, 20);
  EXPECT_EQ(rows[2].value, 500);
}

}  // namespace
}  // namespace bfs3
