#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bfs3/experiment.hpp"
#include "bfs3/selftest.hpp"

namespace {

struct Flags {
  bfs3::ExperimentConfig config;
  std::string rewards = "known";
  double gamma = 0.0;
  std::string out = "-";
  std::string summary;
};

void add_experiment_flags(CLI::App* cmd, Flags& f) {
  auto& c = f.config;
  cmd->add_option("--domain", c.domain, "grid5 | paintpolish:N | wumpus4 | lock:N | random:S,A,seed")
      ->capture_default_str();
  cmd->add_option("--agent", c.agent, "bfs3 | rmax | beb | random")->capture_default_str();
  cmd->add_option("--prior", c.prior, "bfs3 prior: fdm | factored | pointmass")->capture_default_str();
  cmd->add_option("--rewards", f.rewards, "known | dp (Dirichlet-process reward prior)")
      ->check(CLI::IsMember({"known", "dp"}))
      ->capture_default_str();
  cmd->add_option("--d", c.fsss.depth, "FSSS depth")->capture_default_str();
  cmd->add_option("--t", c.fsss.trajectories, "FSSS trajectories per estimate")->capture_default_str();
  cmd->add_option("--C", c.fsss.samples, "samples per action")->capture_default_str();
  cmd->add_option("--N", c.cap, "knownness cap per state-action")->capture_default_str();
  cmd->add_option("--alpha", c.alpha, "total Dirichlet prior mass")->capture_default_str();
  cmd->add_option("--dp-alpha", c.dp_alpha, "DP reward concentration")->capture_default_str();
  cmd->add_option("--M", c.rmax_m, "RMAX knownness threshold")->capture_default_str();
  cmd->add_option("--beta", c.beb_beta, "BEB bonus coefficient")->capture_default_str();
  cmd->add_option("--gamma", f.gamma, "override the domain discount");
  cmd->add_option("--runs", c.runs, "independent runs")->capture_default_str();
  cmd->add_option("--episodes", c.episodes, "episodes per run")->capture_default_str();
  cmd->add_option("--steps", c.max_steps, "step cap per episode")->capture_default_str();
  cmd->add_option("--seed", c.seed, "base seed")->capture_default_str();
  cmd->add_option("--threads", c.threads, "worker threads")->capture_default_str();
  cmd->add_option("--summary", f.summary, "write the per-episode mean table here ('-' for stdout)");
}

void finalize(CLI::App* cmd, Flags& f) {
  f.config.unknown_rewards = f.rewards == "dp";
  if (cmd->count("--gamma") > 0) f.config.gamma = f.gamma;
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) return;
  if (path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open " + path);
  fn(file);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  return out;
}

void set_param(bfs3::ExperimentConfig& c, const std::string& param, const std::string& value) {
  if (param == "t") {
    c.fsss.trajectories = std::stoi(value);
  } else if (param == "d") {
    c.fsss.depth = std::stoi(value);
  } else if (param == "C") {
    c.fsss.samples = std::stoi(value);
  } else if (param == "N") {
    c.cap = std::stoi(value);
  } else if (param == "M") {
    c.rmax_m = std::stoi(value);
  } else if (param == "beta") {
    c.beb_beta = std::stod(value);
  } else if (param == "alpha") {
    c.alpha = std::stod(value);
  } else {
    throw std::invalid_argument("cannot sweep '" + param + "'; expected one of: t, d, C, N, M, beta, alpha");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian model-based RL with BFS3"};
  app.require_subcommand(1);

  Flags run_flags;
  auto* run = app.add_subcommand("run", "run an experiment and write per-step CSV");
  add_experiment_flags(run, run_flags);
  run->add_option("--out", run_flags.out, "CSV path ('-' for stdout)")->capture_default_str();

  Flags sweep_flags;
  std::string sweep_param = "t";
  std::string sweep_values;
  auto* sweep = app.add_subcommand("sweep", "repeat an experiment over values of one parameter");
  add_experiment_flags(sweep, sweep_flags);
  sweep->add_option("--param", sweep_param, "t | d | C | N | M | beta | alpha")->capture_default_str();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep_flags.out.clear();
  sweep->add_option("--out", sweep_flags.out, "per-value CSV prefix (writes <prefix><value>.csv)");

  bool slow = false;
  std::vector<int> only;
  auto* selftest = app.add_subcommand("selftest", "oracle-equivalence and invariant checks");
  selftest->add_flag("--slow", slow, "also run the long experiment criteria");
  selftest->add_option("--only", only, "run just these criterion ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      finalize(run, run_flags);
      const auto records = bfs3::run_experiment(run_flags.config);
      with_output(run_flags.out, [&](std::ostream& o) { bfs3::write_csv(o, records); });
      with_output(run_flags.summary, [&](std::ostream& o) {
        bfs3::write_episode_table(o, bfs3::aggregate(records, run_flags.config.runs, run_flags.config.episodes));
      });
      return 0;
    }
    if (*sweep) {
      finalize(sweep, sweep_flags);
      std::vector<bfs3::SweepRow> rows;
      for (const auto& v : split_list(sweep_values)) {
        auto config = sweep_flags.config;
        set_param(config, sweep_param, v);
        const auto records = bfs3::run_experiment(config);
        std::vector<double> all;
        for (const auto& per_run : bfs3::episode_returns(records, config.runs, config.episodes)) {
          all.insert(all.end(), per_run.begin(), per_run.end());
        }
        long long queries = 0;
        for (const auto& r : records) queries += r.queries;
        rows.push_back({sweep_param, std::stod(v), bfs3::summarize(all), queries});
        if (!sweep_flags.out.empty()) {
          with_output(sweep_flags.out + v + ".csv", [&](std::ostream& o) { bfs3::write_csv(o, records); });
        }
      }
      bfs3::sort_sweep(rows);
      bfs3::write_sweep_table(std::cout, rows);
      return 0;
    }
    if (*selftest) {
      std::vector<int> ids = only;
      if (ids.empty()) {
        ids = bfs3::fast_criteria();
        if (slow) {
          for (int id : bfs3::slow_criteria()) ids.push_back(id);
        }
      }
      return bfs3::run_criteria(ids, std::cout) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
