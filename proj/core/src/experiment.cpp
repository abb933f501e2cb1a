#include "bfs3/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "bfs3/agents.hpp"
#include "bfs3/belief_mdp.hpp"
#include "bfs3/format.hpp"
#include "bfs3/wumpus.hpp"

namespace bfs3 {
namespace {

constexpr std::uint64_t kEnvSalt = 1;
constexpr std::uint64_t kAgentSalt = 2;

template <class Obs>
class Environment {
 public:
  virtual ~Environment() = default;
  virtual Obs reset(Rng& rng) = 0;
  virtual Transition<Obs> step(ActionId a, Rng& rng) = 0;
  virtual bool done() const = 0;
  virtual long long label(const Obs& s) const = 0;
};

class TabularEnvironment final : public Environment<StateId> {
 public:
  explicit TabularEnvironment(std::shared_ptr<const TabularMDP> mdp) : mdp_(std::move(mdp)) {}
  StateId reset(Rng&) override { return state_ = 0; }
  TransitionSample step(ActionId a, Rng& rng) override {
    auto t = mdp_->sample(state_, a, rng);
    state_ = t.next;
    return t;
  }
  bool done() const override { return mdp_->is_terminal(state_); }
  long long label(const StateId& s) const override { return s; }

 private:
  std::shared_ptr<const TabularMDP> mdp_;
  StateId state_ = 0;
};

class WumpusEnvironment final : public Environment<WumpusInfo> {
 public:
  explicit WumpusEnvironment(WumpusConfig config) : config_(config) {}
  WumpusInfo reset(Rng& rng) override {
    layout_ = sample_wumpus_layout(config_, rng);
    return info_ = wumpus_reset(layout_);
  }
  Transition<WumpusInfo> step(ActionId a, Rng&) override {
    auto t = wumpus_step(info_, layout_, a, config_);
    info_ = t.next;
    return t;
  }
  bool done() const override { return info_.terminal(); }
  long long label(const WumpusInfo& s) const override { return s.pos; }

 private:
  WumpusConfig config_;
  WumpusLayout layout_;
  WumpusInfo info_;
};

class WumpusBfs3Agent final : public Agent<WumpusInfo> {
 public:
  WumpusBfs3Agent(std::shared_ptr<const WumpusBeliefModel> model, FsssParams params)
      : model_(std::move(model)), planner_(*model_, params) {}
  ActionId act(const WumpusInfo& s, Rng& rng) override {
    const auto d = planner_.decide(s, rng);
    last_ = {d.queries, d.cache_hit};
    return d.action;
  }
  void observe(const WumpusInfo&, ActionId, const WumpusInfo&, double) override {}
  DecisionInfo last_decision() const override { return last_; }

 private:
  std::shared_ptr<const WumpusBeliefModel> model_;
  Bfs3Planner<WumpusInfo> planner_;
  DecisionInfo last_;
};

template <class Obs>
struct TrialFactory {
  std::function<std::unique_ptr<Environment<Obs>>()> environment;
  std::function<std::unique_ptr<Agent<Obs>>()> agent;
};

template <class Obs>
std::vector<TrialRecord> run_trial(const ExperimentConfig& config, const TrialFactory<Obs>& factory, int run) {
  using Clock = std::chrono::steady_clock;
  Rng env_rng = derive_rng(config.seed, static_cast<std::uint64_t>(run), kEnvSalt);
  Rng agent_rng = derive_rng(config.seed, static_cast<std::uint64_t>(run), kAgentSalt);
  auto env = factory.environment();
  auto agent = factory.agent();
  std::vector<TrialRecord> out;
  double cum = 0.0;
  for (int ep = 0; ep < config.episodes; ++ep) {
    Obs s = env->reset(env_rng);
    agent->begin_episode(s);
    for (int step = 0; step < config.max_steps && !env->done(); ++step) {
      const auto t0 = Clock::now();
      const ActionId a = agent->act(s, agent_rng);
      const auto t1 = Clock::now();
      auto [next, r] = env->step(a, env_rng);
      agent->observe(s, a, next, r);
      cum += r;
      TrialRecord rec;
      rec.run = run;
      rec.episode = ep;
      rec.step = step;
      rec.state = env->label(s);
      rec.action = a;
      rec.reward = r;
      rec.cum_reward = cum;
      rec.queries = agent->last_decision().queries;
      rec.cache_hit = agent->last_decision().cache_hit;
      rec.discoveries = agent->discoveries();
      rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      out.push_back(rec);
      s = std::move(next);
    }
  }
  return out;
}

template <class Obs>
std::vector<TrialRecord> run_all(const ExperimentConfig& config, const TrialFactory<Obs>& factory) {
  std::vector<std::vector<TrialRecord>> per_run(static_cast<std::size_t>(std::max(config.runs, 0)));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < config.runs; i = next++) {
      try {
        per_run[static_cast<std::size_t>(i)] = run_trial(config, factory, i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(config.threads, 1, std::max(config.runs, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  std::vector<TrialRecord> out;
  for (auto& r : per_run) out.insert(out.end(), r.begin(), r.end());
  return out;
}

PriorKind parse_prior(const std::string& name) {
  if (name == "fdm") return PriorKind::kFdm;
  if (name == "factored") return PriorKind::kFactored;
  if (name == "pointmass") return PriorKind::kPointMass;
  throw std::invalid_argument("unknown prior '" + name + "'; expected one of: fdm, factored, pointmass");
}

void check_agent_name(const std::string& name) {
  if (name != "bfs3" && name != "rmax" && name != "beb" && name != "random") {
    throw std::invalid_argument("unknown agent '" + name + "'; expected one of: bfs3, rmax, beb, random");
  }
}

}  // namespace

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config) {
  check_agent_name(config.agent);
  if (config.runs < 0 || config.episodes < 0 || config.max_steps < 0) {
    throw std::invalid_argument("runs, episodes and steps must be non-negative");
  }
  config.fsss.validate();
  const DomainId id = parse_domain(config.domain);

  if (id.kind == DomainKind::kWumpus) {
    const auto wc = wumpus_config(config.gamma);
    auto model = std::make_shared<const WumpusBeliefModel>(wc);
    TrialFactory<WumpusInfo> f;
    f.environment = [wc] { return std::make_unique<WumpusEnvironment>(wc); };
    if (config.agent == "bfs3") {
      f.agent = [model, params = config.fsss] { return std::make_unique<WumpusBfs3Agent>(model, params); };
    } else if (config.agent == "random") {
      f.agent = [] { return std::make_unique<RandomAgent<WumpusInfo>>(kWumpusActions); };
    } else {
      throw std::invalid_argument("agent '" + config.agent + "' needs a tabular domain; wumpus4 supports bfs3, random");
    }
    return run_all(config, f);
  }

  auto mdp = build_tabular_domain(id, config.gamma);
  std::vector<bool> terminal(static_cast<std::size_t>(mdp->num_states()));
  for (StateId s = 0; s < mdp->num_states(); ++s) terminal[static_cast<std::size_t>(s)] = mdp->is_terminal(s);
  TrialFactory<StateId> f;
  f.environment = [mdp] { return std::make_unique<TabularEnvironment>(mdp); };
  if (config.agent == "bfs3") {
    PriorOptions po;
    po.kind = parse_prior(config.prior);
    po.unknown_rewards = config.unknown_rewards;
    po.alpha = config.alpha;
    po.dp_alpha = config.dp_alpha;
    po.cap = config.cap;
    auto belief = std::make_shared<const BeliefMDP>(build_prior(id, *mdp, po), DomainSpec::from(*mdp));
    f.agent = [belief, params = config.fsss] { return std::make_unique<Bfs3Agent>(belief, params); };
  } else if (config.agent == "rmax") {
    if (config.rmax_m < 1) throw std::invalid_argument("rmax needs M >= 1");
    f.agent = [mdp, terminal, M = config.rmax_m] {
      return std::make_unique<RmaxAgent>(mdp->num_states(), mdp->num_actions(), mdp->discount(), mdp->r_max(),
                                         M, terminal);
    };
  } else if (config.agent == "beb") {
    if (config.unknown_rewards) throw std::invalid_argument("beb requires known rewards");
    const RewardModel rewards = KnownRewards::from(*mdp);
    f.agent = [mdp, terminal, rewards, beta = config.beb_beta] {
      return std::make_unique<BebAgent>(mdp->num_states(), mdp->num_actions(), mdp->discount(), rewards, beta,
                                        terminal);
    };
  } else {
    f.agent = [A = mdp->num_actions()] { return std::make_unique<RandomAgent<StateId>>(A); };
  }
  return run_all(config, f);
}

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records, bool include_wall) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.run << ',' << r.step << ',' << r.state << ',' << r.action << ',' << format_double(r.reward) << ','
        << format_double(r.cum_reward) << ',' << r.queries << ',' << (r.cache_hit ? 1 : 0) << ',' << r.discoveries
        << ',' << (include_wall ? format_fixed(r.wall_ms, 3) : std::string("0")) << '\n';
  }
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.n = static_cast<int>(values.size());
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

std::vector<std::vector<double>> episode_returns(const std::vector<TrialRecord>& records, int runs, int episodes) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(runs),
                                       std::vector<double>(static_cast<std::size_t>(episodes), 0.0));
  for (const auto& r : records) {
    if (r.run < runs && r.episode < episodes) {
      out[static_cast<std::size_t>(r.run)][static_cast<std::size_t>(r.episode)] += r.reward;
    }
  }
  return out;
}

std::vector<EpisodeRow> aggregate(const std::vector<TrialRecord>& records, int runs, int episodes) {
  const auto returns = episode_returns(records, runs, episodes);
  std::vector<EpisodeRow> rows;
  for (int e = 0; e < episodes; ++e) {
    std::vector<double> col;
    col.reserve(static_cast<std::size_t>(runs));
    for (const auto& run : returns) col.push_back(run[static_cast<std::size_t>(e)]);
    rows.push_back({e, summarize(col)});
  }
  return rows;
}

void sort_sweep(std::vector<SweepRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.value < b.value; });
}

void write_episode_table(std::ostream& out, const std::vector<EpisodeRow>& rows) {
  out << "episode,n,mean_return,stderr\n";
  for (const auto& r : rows) {
    out << r.episode << ',' << r.stats.n << ',' << format_double(r.stats.mean) << ','
        << format_double(r.stats.std_error) << '\n';
  }
}

void write_sweep_table(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "param,value,n,mean_return,stderr,queries\n";
  for (const auto& r : rows) {
    out << r.param << ',' << format_double(r.value) << ',' << r.stats.n << ',' << format_double(r.stats.mean) << ','
        << format_double(r.stats.std_error) << ',' << r.queries << '\n';
  }
}

}  // namespace bfs3
