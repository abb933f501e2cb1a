#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bfs3/domains.hpp"
#include "bfs3/fsss.hpp"

namespace bfs3 {

/// Everything that determines an experiment's output.
struct ExperimentConfig {
  std::string domain = "grid5";
  std::string agent = "bfs3";  // bfs3 | rmax | beb | random
  std::string prior = "fdm";   // fdm | factored | pointmass (bfs3 only)
  bool unknown_rewards = false;
  FsssParams fsss{10, 20, 2, true};
  int cap = 20;
  double alpha = 1.0;
  double dp_alpha = 1.0;
  int rmax_m = 5;
  double beb_beta = 2.5;
  std::optional<double> gamma;
  int runs = 1;
  int episodes = 1;
  int max_steps = 200;  // per episode
  std::uint64_t seed = 0;
  int threads = 1;
};

/// One executed step.
struct TrialRecord {
  int run = 0;
  int episode = 0;  // not written to CSV; recoverable from step resets
  int step = 0;     // within the episode
  long long state = 0;
  ActionId action = 0;
  double reward = 0.0;
  double cum_reward = 0.0;  // over the whole run
  long long queries = 0;
  bool cache_hit = false;
  long long discoveries = 0;
  double wall_ms = 0.0;
};

/// Runs `runs` independent trials; run i draws its environment and agent
/// streams from (seed, i). Records come back in (run, episode, step) order
/// whatever the thread count. Throws std::invalid_argument for unknown
/// names or unsupported combinations.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config);

inline constexpr const char* kCsvHeader = "run,step,state,action,reward,cum_reward,queries,cache_hit,discoveries,wall_ms";

/// `include_wall = false` writes wall_ms as 0, for byte comparisons.
void write_csv(std::ostream& out, const std::vector<TrialRecord>& records, bool include_wall = true);

struct Summary {
  int n = 0;
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n); 0 when n < 2
};

Summary summarize(const std::vector<double>& values);

/// returns[run][episode]: undiscounted return of each episode.
std::vector<std::vector<double>> episode_returns(const std::vector<TrialRecord>& records, int runs, int episodes);

struct EpisodeRow {
  int episode = 0;
  Summary stats;
};

/// Per-episode mean return across runs, in episode order.
std::vector<EpisodeRow> aggregate(const std::vector<TrialRecord>& records, int runs, int episodes);

struct SweepRow {
  std::string param;
  double value = 0.0;
  Summary stats;  // over all (run, episode) returns
  long long queries = 0;
};

/// Sorts by value ascending.
void sort_sweep(std::vector<SweepRow>& rows);

void write_episode_table(std::ostream& out, const std::vector<EpisodeRow>& rows);
void write_sweep_table(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace bfs3
