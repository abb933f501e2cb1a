#include "bfs3/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bfs3 {
namespace {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Index k in [0, n) from a real u in [0, n); guards the u == n rounding edge.
int floor_index(double u, int n) { return std::min(static_cast<int>(u), n - 1); }

std::pair<double, double> reward_range(const RewardModel& m) {
  if (const auto* dp = std::get_if<DpRewardPrior>(&m)) return {dp->r_min, dp->r_max};
  const auto& known = std::get<KnownRewards>(m);
  if (known.table.empty()) return {0.0, 0.0};
  auto [lo, hi] = std::minmax_element(known.table.begin(), known.table.end());
  return {*lo, *hi};
}

// Sequential CRP over every unpinned pair of a sampled MDP: values drawn
// earlier in the sweep join the restaurant for later pairs.
class RewardSweep {
 public:
  RewardSweep(const RewardModel& model, const SuffStats& stats) : model_(model), stats_(stats) {}

  double next(StateId s, ActionId a, Rng& rng) {
    if (const auto* known = std::get_if<KnownRewards>(&model_)) return (*known)(s, a);
    const auto& dp = std::get<DpRewardPrior>(model_);
    if (auto r = stats_.reward(s, a)) return *r;
    const int pinned = stats_.pinned_count();
    const int n = pinned + static_cast<int>(drawn_.size());
    const double u = uniform(rng, 0.0, static_cast<double>(n) + dp.alpha);
    double r;
    if (u < static_cast<double>(n)) {
      const int k = floor_index(u, n);
      r = k < pinned ? stats_.pinned_value(k) : drawn_[static_cast<std::size_t>(k - pinned)];
    } else {
      r = uniform(rng, dp.r_min, dp.r_max);
    }
    drawn_.push_back(r);
    return r;
  }

 private:
  const RewardModel& model_;
  const SuffStats& stats_;
  std::vector<double> drawn_;
};

std::vector<TabularMDP::Outcome> dirichlet_row(const std::vector<double>& alpha,
                                               const std::vector<std::pair<StateId, int>>& hist, Rng& rng) {
  std::vector<double> post = alpha;
  for (const auto& [next, c] : hist) post[static_cast<std::size_t>(next)] += c;
  const auto theta = sample_dirichlet(post, rng);
  std::vector<TabularMDP::Outcome> row;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (theta[i] > 0.0) row.push_back({static_cast<StateId>(i), theta[i]});
  }
  return row;
}

}  // namespace

KnownRewards KnownRewards::from(const TabularMDP& mdp) {
  KnownRewards out;
  out.num_actions = mdp.num_actions();
  out.table.reserve(static_cast<std::size_t>(mdp.num_states()) * static_cast<std::size_t>(mdp.num_actions()));
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    for (ActionId a = 0; a < mdp.num_actions(); ++a) out.table.push_back(mdp.reward(s, a));
  }
  return out;
}

double dp_reward_sample(StateId s, ActionId a, const SuffStats& stats, const DpRewardPrior& prior, Rng& rng) {
  if (auto r = stats.reward(s, a)) return *r;
  const int n = stats.pinned_count();
  const double u = uniform(rng, 0.0, static_cast<double>(n) + prior.alpha);
  if (u < static_cast<double>(n)) return stats.pinned_value(floor_index(u, n));
  return uniform(rng, prior.r_min, prior.r_max);
}

DpPredictive dp_reward_predictive(StateId s, ActionId a, const SuffStats& stats, const DpRewardPrior& prior) {
  DpPredictive out;
  if (auto r = stats.reward(s, a)) {
    out.atoms.emplace_back(*r, 1.0);
    return out;
  }
  const int n = stats.pinned_count();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) values.push_back(stats.pinned_value(k));
  std::sort(values.begin(), values.end());
  const double denom = static_cast<double>(n) + prior.alpha;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    out.atoms.emplace_back(values[i], static_cast<double>(j - i) / denom);
    i = j;
  }
  out.fresh = prior.alpha / denom;
  return out;
}

std::vector<double> sample_dirichlet(const std::vector<double>& alpha, Rng& rng) {
  // For a < 1, Gamma(a) = Gamma(a + 1) * U^(1/a); the log form keeps draws
  // with a ~ 1e-3 from collapsing to zero.
  std::vector<double> logs(alpha.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double a = alpha[i];
    if (!(a > 0.0)) throw std::invalid_argument("sample_dirichlet: concentrations must be positive");
    double lg;
    if (a >= 1.0) {
      lg = std::log(std::gamma_distribution<double>(a, 1.0)(rng));
    } else {
      const double g = std::gamma_distribution<double>(a + 1.0, 1.0)(rng);
      const double u = 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);  // (0, 1]
      lg = std::log(g) + std::log(u) / a;
    }
    logs[i] = lg;
    top = std::max(top, lg);
  }
  std::vector<double> out(alpha.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = std::exp(logs[i] - top);
    sum += out[i];
  }
  for (auto& x : out) x /= sum;
  return out;
}

FdmPrior::FdmPrior(int num_states, int num_actions, std::vector<double> alpha, RewardModel rewards, int cap,
                   std::vector<bool> terminal, double gamma)
    : num_states_(num_states),
      num_actions_(num_actions),
      alpha_(std::move(alpha)),
      rewards_(std::move(rewards)),
      cap_(cap),
      terminal_(std::move(terminal)),
      gamma_(gamma) {
  if (num_states < 1 || num_actions < 1 || cap < 1) {
    throw std::invalid_argument("FdmPrior: sizes and cap must be positive");
  }
  if (alpha_.size() != static_cast<std::size_t>(num_states)) {
    throw std::invalid_argument("FdmPrior: alpha must have one entry per state");
  }
  if (!terminal_.empty() && terminal_.size() != static_cast<std::size_t>(num_states)) {
    throw std::invalid_argument("FdmPrior: terminal mask size mismatch");
  }
  if (const auto* known = std::get_if<KnownRewards>(&rewards_)) {
    if (known->num_actions != num_actions ||
        known->table.size() != static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions)) {
      throw std::invalid_argument("FdmPrior: known reward table size mismatch");
    }
  } else {
    const auto& dp = std::get<DpRewardPrior>(rewards_);
    if (!(dp.alpha > 0.0) || !(dp.r_min <= dp.r_max)) throw std::invalid_argument("FdmPrior: bad DP reward prior");
  }
  alpha_cumulative_.reserve(alpha_.size());
  symmetric_ = true;
  for (double a : alpha_) {
    if (!(a > 0.0)) throw std::invalid_argument("FdmPrior: alpha entries must be positive");
    alpha_sum_ += a;
    alpha_cumulative_.push_back(alpha_sum_);
    symmetric_ = symmetric_ && a == alpha_.front();
  }
}

StateId FdmPrior::sample_next_state(StateId s, ActionId a, const SuffStats& stats, Rng& rng) const {
  const int total = stats.total(s, a);
  const double u = uniform(rng, 0.0, static_cast<double>(total) + alpha_sum_);
  if (u < static_cast<double>(total)) return stats.observation(s, a, floor_index(u, total));
  const double v = u - static_cast<double>(total);
  if (symmetric_) return floor_index(v / alpha_.front(), num_states_);
  auto it = std::upper_bound(alpha_cumulative_.begin(), alpha_cumulative_.end(), v);
  return std::min(static_cast<StateId>(it - alpha_cumulative_.begin()), num_states_ - 1);
}

double FdmPrior::sample_reward(StateId s, ActionId a, const SuffStats& stats, Rng& rng) const {
  if (const auto* known = std::get_if<KnownRewards>(&rewards_)) return (*known)(s, a);
  return dp_reward_sample(s, a, stats, std::get<DpRewardPrior>(rewards_), rng);
}

TransitionSample FdmPrior::predictive_sample(StateId s, ActionId a, const SuffStats& stats, Rng& rng) const {
  const StateId next = sample_next_state(s, a, stats, rng);
  return {next, sample_reward(s, a, stats, rng)};
}

TabularMDP FdmPrior::sample_mdp(const SuffStats& stats, Rng& rng) const {
  const auto [r_min, r_max] = reward_range(rewards_);
  TabularMDP mdp(num_states_, num_actions_, gamma_, r_min, r_max);
  RewardSweep rewards(rewards_, stats);
  for (StateId s = 0; s < num_states_; ++s) {
    if (!terminal_.empty() && terminal_[static_cast<std::size_t>(s)]) continue;
    for (ActionId a = 0; a < num_actions_; ++a) {
      auto row = dirichlet_row(alpha_, stats.histogram(s, a), rng);
      mdp.set_transition(s, a, std::move(row), rewards.next(s, a, rng));
    }
  }
  for (StateId s = 0; s < num_states_; ++s) {
    if (!terminal_.empty() && terminal_[static_cast<std::size_t>(s)]) mdp.set_terminal(s);
  }
  return mdp;
}

bool FdmPrior::update(SuffStats& stats, StateId s, ActionId a, StateId next, double r) const {
  return stats.update(s, a, next, r);
}

double fdm_predictive_prob(StateId s, ActionId a, StateId next, const SuffStats& stats, const FdmPrior& prior) {
  const double num = stats.count(s, a, next) + prior.alpha()[static_cast<std::size_t>(next)];
  return num / (stats.total(s, a) + prior.alpha_sum());
}

FactoredObjectPrior::FactoredObjectPrior(int num_objects, int local_states, int local_actions,
                                         std::vector<double> alpha, KnownRewards rewards, int cap,
                                         std::vector<bool> terminal, double gamma)
    : num_objects_(num_objects),
      num_states_(0),
      local_(local_states, local_actions, std::move(alpha),
             KnownRewards{local_actions, std::vector<double>(static_cast<std::size_t>(local_states) *
                                                             static_cast<std::size_t>(local_actions))},
             cap),
      rewards_(std::move(rewards)),
      terminal_(std::move(terminal)),
      gamma_(gamma) {
  if (num_objects < 1) throw std::invalid_argument("FactoredObjectPrior: need at least one object");
  long long states = 1;
  for (int i = 0; i < num_objects; ++i) {
    states *= local_states;
    if (states > std::numeric_limits<int>::max()) throw std::invalid_argument("FactoredObjectPrior: too many states");
  }
  num_states_ = static_cast<int>(states);
  if (rewards_.num_actions != num_actions() ||
      rewards_.table.size() != static_cast<std::size_t>(num_states_) * static_cast<std::size_t>(num_actions())) {
    throw std::invalid_argument("FactoredObjectPrior: known reward table size mismatch");
  }
  if (!terminal_.empty() && terminal_.size() != static_cast<std::size_t>(num_states_)) {
    throw std::invalid_argument("FactoredObjectPrior: terminal mask size mismatch");
  }
}

FactoredObjectPrior::DecodedAction FactoredObjectPrior::decode_action(ActionId a) const {
  if (a < 0 || a >= num_actions()) throw std::invalid_argument("FactoredObjectPrior: action outside the encoding");
  return {a / local_actions(), a % local_actions()};
}

StateId FactoredObjectPrior::local_state(StateId global, int object) const {
  if (global < 0 || global >= num_states_ || object < 0 || object >= num_objects_) {
    throw std::invalid_argument("FactoredObjectPrior: state or object out of range");
  }
  const int K = local_states();
  for (int i = 0; i < object; ++i) global /= K;
  return global % K;
}

StateId FactoredObjectPrior::with_local(StateId global, int object, StateId local) const {
  const int K = local_states();
  int place = 1;
  for (int i = 0; i < object; ++i) place *= K;
  const StateId old = (global / place) % K;
  return global + (local - old) * place;
}

TransitionSample FactoredObjectPrior::predictive_sample(StateId s, ActionId a, const SuffStats& stats,
                                                        Rng& rng) const {
  const auto [object, oa] = decode_action(a);
  const StateId next_local = local_.sample_next_state(local_state(s, object), oa, stats, rng);
  return {with_local(s, object, next_local), rewards_(s, a)};
}

TabularMDP FactoredObjectPrior::sample_mdp(const SuffStats& stats, Rng& rng) const {
  const int K = local_states();
  const int m = local_actions();
  std::vector<std::vector<TabularMDP::Outcome>> local_rows;
  local_rows.reserve(static_cast<std::size_t>(K) * static_cast<std::size_t>(m));
  for (StateId ls = 0; ls < K; ++ls) {
    for (ActionId oa = 0; oa < m; ++oa) local_rows.push_back(dirichlet_row(local_.alpha(), stats.histogram(ls, oa), rng));
  }
  auto [lo, hi] = std::minmax_element(rewards_.table.begin(), rewards_.table.end());
  TabularMDP mdp(num_states_, num_actions(), gamma_, *lo, *hi);
  for (StateId s = 0; s < num_states_; ++s) {
    if (!terminal_.empty() && terminal_[static_cast<std::size_t>(s)]) {
      mdp.set_terminal(s);
      continue;
    }
    for (ActionId a = 0; a < num_actions(); ++a) {
      const auto [object, oa] = decode_action(a);
      const auto& local_row =
          local_rows[static_cast<std::size_t>(local_state(s, object)) * static_cast<std::size_t>(m) +
                     static_cast<std::size_t>(oa)];
      std::vector<TabularMDP::Outcome> row;
      row.reserve(local_row.size());
      for (const auto& o : local_row) row.push_back({with_local(s, object, o.next), o.prob});
      mdp.set_transition(s, a, std::move(row), rewards_(s, a));
    }
  }
  return mdp;
}

bool FactoredObjectPrior::update(SuffStats& stats, StateId s, ActionId a, StateId next, double r) const {
  const auto [object, oa] = decode_action(a);
  return stats.update(local_state(s, object), oa, local_state(next, object), r);
}

}  // namespace bfs3
