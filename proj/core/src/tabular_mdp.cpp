#include "bfs3/tabular_mdp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bfs3/format.hpp"

namespace bfs3 {

TabularMDP::TabularMDP(int num_states, int num_actions, double gamma, double r_min, double r_max)
    : num_states_(num_states), num_actions_(num_actions), gamma_(gamma), r_min_(r_min), r_max_(r_max) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("TabularMDP: need at least one state and one action");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("TabularMDP: discount must lie in [0, 1)");
  }
  if (!(r_min <= r_max)) {
    throw std::invalid_argument("TabularMDP: r_min > r_max");
  }
  const auto n = static_cast<std::size_t>(num_states) * static_cast<std::size_t>(num_actions);
  rows_.resize(n);
  cumulative_.resize(n);
  reward_.assign(n, std::clamp(0.0, r_min, r_max));
  terminal_.assign(static_cast<std::size_t>(num_states), false);
  for (StateId s = 0; s < num_states; ++s) {
    for (ActionId a = 0; a < num_actions; ++a) {
      set_row_unchecked(index(s, a), {{s, 1.0}}, reward_[index(s, a)]);
    }
  }
}

void TabularMDP::check_state(StateId s) const {
  if (s < 0 || s >= num_states_) {
    throw std::invalid_argument("TabularMDP: state " + std::to_string(s) + " out of range");
  }
}

void TabularMDP::check_action(ActionId a) const {
  if (a < 0 || a >= num_actions_) {
    throw std::invalid_argument("TabularMDP: action " + std::to_string(a) + " out of range");
  }
}

void TabularMDP::set_transition(StateId s, ActionId a, std::vector<Outcome> row, double reward) {
  check_state(s);
  check_action(a);
  if (row.empty()) {
    throw std::invalid_argument("TabularMDP: empty transition row");
  }
  double total = 0.0;
  for (const auto& o : row) {
    check_state(o.next);
    if (!(o.prob >= 0.0)) {
      throw std::invalid_argument("TabularMDP: negative transition probability");
    }
    total += o.prob;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("TabularMDP: transition row sums to " + format_double(total));
  }
  if (reward < r_min_ || reward > r_max_) {
    throw std::invalid_argument("TabularMDP: reward " + format_double(reward) + " outside [r_min, r_max]");
  }
  if (terminal_[static_cast<std::size_t>(s)]) {
    return;
  }
  set_row_unchecked(index(s, a), std::move(row), reward);
}

void TabularMDP::set_row_unchecked(std::size_t idx, std::vector<Outcome> row, double reward) {
  std::sort(row.begin(), row.end(), [](const Outcome& x, const Outcome& y) { return x.next < y.next; });
  std::vector<Outcome> merged;
  merged.reserve(row.size());
  for (const auto& o : row) {
    if (o.prob == 0.0) continue;
    if (!merged.empty() && merged.back().next == o.next) {
      merged.back().prob += o.prob;
    } else {
      merged.push_back(o);
    }
  }
  std::vector<double> cum(merged.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    acc += merged[i].prob;
    cum[i] = acc;
  }
  cum.back() = 1.0;
  rows_[idx] = std::move(merged);
  cumulative_[idx] = std::move(cum);
  reward_[idx] = reward;
}

void TabularMDP::set_terminal(StateId s) {
  check_state(s);
  terminal_[static_cast<std::size_t>(s)] = true;
  for (ActionId a = 0; a < num_actions_; ++a) {
    set_row_unchecked(index(s, a), {{s, 1.0}}, 0.0);
  }
}

TransitionSample TabularMDP::sample(const StateId& s, ActionId a, Rng& rng) const {
  const auto idx = index(s, a);
  const auto& cum = cumulative_[idx];
  const auto& row = rows_[idx];
  if (row.size() == 1) {
    return {row.front().next, reward_[idx]};
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  const auto k = std::min(static_cast<std::size_t>(it - cum.begin()), row.size() - 1);
  return {row[k].next, reward_[idx]};
}

double TabularMDP::probability(StateId s, ActionId a, StateId next) const {
  for (const auto& o : row(s, a)) {
    if (o.next == next) return o.prob;
  }
  return 0.0;
}

bool TabularMDP::operator==(const TabularMDP& other) const {
  if (num_states_ != other.num_states_ || num_actions_ != other.num_actions_ || gamma_ != other.gamma_ ||
      r_min_ != other.r_min_ || r_max_ != other.r_max_ || reward_ != other.reward_ ||
      terminal_ != other.terminal_) {
    return false;
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != other.rows_[i].size()) return false;
    for (std::size_t k = 0; k < rows_[i].size(); ++k) {
      if (rows_[i][k].next != other.rows_[i][k].next || rows_[i][k].prob != other.rows_[i][k].prob) return false;
    }
  }
  return true;
}

double bellman_q(const TabularMDP& mdp, std::span<const double> V, StateId s, ActionId a) {
  double expect = 0.0;
  for (const auto& o : mdp.row(s, a)) {
    expect += o.prob * V[static_cast<std::size_t>(o.next)];
  }
  return mdp.reward(s, a) + mdp.discount() * expect;
}

ValueTable value_iteration(const TabularMDP& mdp, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("value_iteration: epsilon must be positive");
  }
  const double gamma = mdp.discount();
  if (!(gamma < 1.0)) {
    throw std::invalid_argument("value_iteration: discount must be < 1");
  }
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  ValueTable table;
  table.num_actions = A;
  table.V.assign(static_cast<std::size_t>(S), 0.0);
  table.Q.assign(static_cast<std::size_t>(S) * static_cast<std::size_t>(A), 0.0);

  const double threshold = gamma > 0.0 ? epsilon * (1.0 - gamma) / gamma : std::numeric_limits<double>::infinity();
  std::vector<double> next(table.V.size());
  while (true) {
    double delta = 0.0;
    for (StateId s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (ActionId a = 0; a < A; ++a) {
        best = std::max(best, bellman_q(mdp, table.V, s, a));
      }
      next[static_cast<std::size_t>(s)] = best;
      delta = std::max(delta, std::abs(best - table.V[static_cast<std::size_t>(s)]));
    }
    table.V.swap(next);
    if (delta < threshold) break;
  }
  // Q and V are made consistent with a final evaluation of the returned V.
  for (StateId s = 0; s < S; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (ActionId a = 0; a < A; ++a) {
      const double q = bellman_q(mdp, table.V, s, a);
      table.Q[static_cast<std::size_t>(s) * static_cast<std::size_t>(A) + static_cast<std::size_t>(a)] = q;
      best = std::max(best, q);
    }
    next[static_cast<std::size_t>(s)] = best;
  }
  table.V.swap(next);
  return table;
}

Policy greedy_policy(const TabularMDP& mdp, std::span<const double> V) {
  Policy pi(static_cast<std::size_t>(mdp.num_states()), 0);
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    double best = bellman_q(mdp, V, s, 0);
    for (ActionId a = 1; a < mdp.num_actions(); ++a) {
      const double q = bellman_q(mdp, V, s, a);
      if (q > best) {
        best = q;
        pi[static_cast<std::size_t>(s)] = a;
      }
    }
  }
  return pi;
}

std::vector<double> evaluate_policy(const TabularMDP& mdp, const Policy& policy) {
  const auto n = static_cast<std::size_t>(mdp.num_states());
  // Augmented matrix [I - gamma P | R].
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t s = 0; s < n; ++s) {
    const auto a = policy[s];
    m[s][s] += 1.0;
    for (const auto& o : mdp.row(static_cast<StateId>(s), a)) {
      m[s][static_cast<std::size_t>(o.next)] -= mdp.discount() * o.prob;
    }
    m[s][n] = mdp.reward(static_cast<StateId>(s), a);
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    std::swap(m[col], m[pivot]);
    const double p = m[col][col];
    for (std::size_t k = col; k <= n; ++k) m[col][k] /= p;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || m[r][col] == 0.0) continue;
      const double f = m[r][col];
      for (std::size_t k = col; k <= n; ++k) m[r][k] -= f * m[col][k];
    }
  }
  std::vector<double> v(n);
  for (std::size_t s = 0; s < n; ++s) v[s] = m[s][n];
  return v;
}

TabularMDP random_tabular_mdp(int num_states, int num_actions, std::uint64_t seed, int sparsity, double gamma) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("random_tabular_mdp: degenerate sizes");
  }
  if (sparsity < 1 || sparsity > num_states) {
    throw std::invalid_argument("random_tabular_mdp: sparsity must lie in [1, S]");
  }
  Rng rng(seed);
  TabularMDP mdp(num_states, num_actions, gamma, 0.0, 1.0);
  std::vector<StateId> perm(static_cast<std::size_t>(num_states));
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (StateId s = 0; s < num_states; ++s) {
    for (ActionId a = 0; a < num_actions; ++a) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int k = 0; k < sparsity; ++k) {
        std::uniform_int_distribution<int> pick(k, num_states - 1);
        std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(pick(rng))]);
      }
      std::vector<TabularMDP::Outcome> row;
      double total = 0.0;
      for (int k = 0; k < sparsity; ++k) {
        const double w = expo(rng);
        row.push_back({perm[static_cast<std::size_t>(k)], w});
        total += w;
      }
      for (auto& o : row) o.prob /= total;
      mdp.set_transition(s, a, std::move(row), unit(rng));
    }
  }
  return mdp;
}

void write_tabular_mdp(std::ostream& out, const TabularMDP& mdp) {
  out << mdp.num_states() << ' ' << mdp.num_actions() << ' ' << format_double(mdp.discount()) << ' '
      << format_double(mdp.r_min()) << ' ' << format_double(mdp.r_max()) << '\n';
  std::vector<StateId> terminals;
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    if (mdp.is_terminal(s)) terminals.push_back(s);
    for (ActionId a = 0; a < mdp.num_actions(); ++a) {
      out << s << ' ' << a << ' ' << format_double(mdp.reward(s, a));
      for (const auto& o : mdp.row(s, a)) {
        out << ' ' << o.next << ' ' << format_double(o.prob);
      }
      out << '\n';
    }
  }
  if (!terminals.empty()) {
    out << "terminal";
    for (auto s : terminals) out << ' ' << s;
    out << '\n';
  }
}

TabularMDP read_tabular_mdp(std::istream& in) {
  std::string line;
  auto fail = [](const std::string& why) -> TabularMDP { throw std::runtime_error("read_tabular_mdp: " + why); };
  if (!std::getline(in, line)) return fail("missing header");
  std::istringstream header(line);
  int S = 0, A = 0;
  double gamma = 0, r_min = 0, r_max = 0;
  if (!(header >> S >> A >> gamma >> r_min >> r_max)) return fail("malformed header");
  TabularMDP mdp(S, A, gamma, r_min, r_max);
  std::vector<bool> seen(static_cast<std::size_t>(S) * static_cast<std::size_t>(A), false);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line.rfind("terminal", 0) == 0) {
      std::string tag;
      ls >> tag;
      StateId s;
      while (ls >> s) mdp.set_terminal(s);
      continue;
    }
    StateId s;
    ActionId a;
    double r;
    if (!(ls >> s >> a >> r)) return fail("malformed row: " + line);
    std::vector<TabularMDP::Outcome> row;
    StateId t;
    double p;
    while (ls >> t >> p) row.push_back({t, p});
    mdp.set_transition(s, a, std::move(row), r);
    seen[static_cast<std::size_t>(s) * static_cast<std::size_t>(A) + static_cast<std::size_t>(a)] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) return fail("missing (s,a) rows");
  return mdp;
}

}  // namespace bfs3
