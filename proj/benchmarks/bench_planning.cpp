#include <benchmark/benchmark.h>

#include <memory>

#include "bfs3/agents.hpp"
#include "bfs3/domains.hpp"
#include "bfs3/fsss.hpp"
#include "bfs3/grid_world.hpp"

namespace {

using namespace bfs3;

std::shared_ptr<const BeliefMDP> grid_belief() {
  const auto id = parse_domain("grid5");
  const auto grid = build_tabular_domain(id);
  return std::make_shared<const BeliefMDP>(build_prior(id, *grid, PriorOptions{}), DomainSpec::from(*grid));
}

void BM_FsssTabular(benchmark::State& state) {
  const auto grid = make_grid_world();
  const FsssParams p{static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 2, false};
  Rng rng(1);
  long long queries = 0;
  for (auto _ : state) {
    auto est = fsss_estimate<StateId>(0, p, grid, rng);
    queries += est.tree.query_count();
    benchmark::DoNotOptimize(est.value);
  }
  state.counters["queries/s"] = benchmark::Counter(static_cast<double>(queries), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_FsssTabular)->Args({10, 20})->Args({15, 100});

void BM_FsssBelief(benchmark::State& state) {
  const auto belief = grid_belief();
  const FsssParams p{static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1, false};
  Rng rng(2);
  long long queries = 0;
  for (auto _ : state) {
    auto est = fsss_estimate<BeliefState>(belief->initial_belief(0), p, *belief, rng);
    queries += est.tree.query_count();
    benchmark::DoNotOptimize(est.value);
  }
  state.counters["queries/s"] = benchmark::Counter(static_cast<double>(queries), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_FsssBelief)->Args({10, 20})->Args({10, 200});

void BM_BeliefStep(benchmark::State& state) {
  const auto belief = grid_belief();
  Rng rng(3);
  BeliefState b = belief->initial_belief(0);
  int k = 0;
  for (auto _ : state) {
    auto t = belief_step(*belief, b, k++ % 4, rng);
    b = belief->is_terminal(t.next) || k % 50 == 0 ? belief->initial_belief(0) : std::move(t.next);
    benchmark::DoNotOptimize(b);
  }
}
BENCHMARK(BM_BeliefStep);

void BM_FdmPredictive(benchmark::State& state) {
  const int S = static_cast<int>(state.range(0));
  const FdmPrior prior(S, 4, FdmPrior::symmetric_alpha(S, 1.0 / S),
                       KnownRewards{4, std::vector<double>(static_cast<std::size_t>(S * 4), 0.0)}, 20);
  SuffStats stats = prior.empty_stats();
  Rng rng(4);
  for (int k = 0; k < 10; ++k) stats.update(0, 0, k % S, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(prior.predictive_sample(0, 0, stats, rng));
}
BENCHMARK(BM_FdmPredictive)->Arg(25)->Arg(256);

void BM_Bfs3Decision(benchmark::State& state) {
  const auto belief = grid_belief();
  Rng rng(5);
  for (auto _ : state) {
    Bfs3Planner<BeliefState> planner(*belief, FsssParams{10, 200, 1, true});
    benchmark::DoNotOptimize(planner.decide(belief->initial_belief(0), rng).action);
  }
}
BENCHMARK(BM_Bfs3Decision)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
