#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "bfs3/types.hpp"

namespace bfs3 {

struct FsssParams {
  int depth = 1;         // d: rollout length / tree depth
  int trajectories = 1;  // t: rollout budget per estimate
  int samples = 1;       // C: sampled children per (node, action)
  /// Stop once the root's bounds meet (U - L < 1e-9). Rollouts on a closed
  /// root are fixed points, so this only saves queries.
  bool early_stop = true;

  void validate() const {
    if (depth < 1 || trajectories < 1 || samples < 1) {
      throw std::invalid_argument("FsssParams: d, t and C must all be >= 1");
    }
  }

  /// Worst-case oracle queries of a single estimate: t * d * A * C.
  long long query_budget(int num_actions) const {
    return static_cast<long long>(trajectories) * depth * num_actions * samples;
  }
};

inline constexpr double kClosedGap = 1e-9;

template <class State>
struct SearchNode {
  struct Child {
    SearchNode* node;
    int count;
  };
  struct Edge {
    double mean_reward = 0.0;
    std::vector<Child> children;  // insertion order
    double upper = 0.0;
    double lower = 0.0;
  };

  const State* state = nullptr;  // owned by the tree's key
  int depth = 0;
  bool visited = false;
  bool terminal = false;
  double upper = 0.0;
  double lower = 0.0;
  std::vector<Edge> edges;  // empty until expanded
};

/// FSSS bookkeeping, one node per (state, depth). Node addresses are stable
/// for the lifetime of the tree, including across moves.
template <class State, class Hash = std::hash<State>>
class SearchTree {
 public:
  using Node = SearchNode<State>;

  /// `bounds[l]` applies to nodes at depth l.
  SearchTree(FsssParams params, std::vector<ValueBounds> bounds) : params_(params), bounds_(std::move(bounds)) {}
  SearchTree(SearchTree&&) noexcept = default;
  SearchTree& operator=(SearchTree&&) noexcept = default;
  SearchTree(const SearchTree&) = delete;
  SearchTree& operator=(const SearchTree&) = delete;

  const FsssParams& params() const { return params_; }
  /// Bounds for fresh nodes at the given depth; always contain 0 (the leaf
  /// value).
  const ValueBounds& bounds(int depth) const { return bounds_[static_cast<std::size_t>(depth)]; }
  long long query_count() const { return queries_; }
  void count_query() { ++queries_; }
  std::size_t size() const { return nodes_.size(); }

  Node* root() { return root_; }
  const Node* root() const { return root_; }
  void set_root(Node* n) { root_ = n; }

  Node* find(const State& s, int depth) {
    auto it = nodes_.find(Key{s, depth});
    return it == nodes_.end() ? nullptr : &it->second;
  }
  const Node* find(const State& s, int depth) const {
    auto it = nodes_.find(Key{s, depth});
    return it == nodes_.end() ? nullptr : &it->second;
  }

  /// Returns the node and whether it was created by this call.
  std::pair<Node*, bool> get_or_create(const State& s, int depth) {
    auto [it, inserted] = nodes_.try_emplace(Key{s, depth});
    Node& n = it->second;
    if (inserted) {
      n.state = &it->first.state;
      n.depth = depth;
      order_.push_back(&n);
    }
    return {&n, inserted};
  }

  /// Nodes in creation order.
  const std::vector<Node*>& nodes() const { return order_; }

 private:
  struct Key {
    State state;
    int depth;
    bool operator==(const Key& o) const { return depth == o.depth && state == o.state; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(hash_combine(static_cast<std::uint64_t>(Hash{}(k.state)),
                                                   static_cast<std::uint64_t>(k.depth)));
    }
  };

  FsssParams params_;
  std::vector<ValueBounds> bounds_;
  long long queries_ = 0;
  std::unordered_map<Key, Node, KeyHash> nodes_;
  std::vector<Node*> order_;
  Node* root_ = nullptr;
};

/// Count-weighted Bellman backup of one expanded node:
///   U_a = R(a) + gamma * sum_s' (count(a,s') / C) U(s'),  L_a likewise,
///   U = max_a U_a,  L = max_a L_a.
/// Results are clamped to the tree's value bounds, which absorbs rounding at
/// the first expansion and keeps U and L monotone.
template <class State>
void bellman_backup(SearchNode<State>& node, double gamma, int samples, ValueBounds bounds) {
  const double inv = 1.0 / static_cast<double>(samples);
  double best_upper = bounds.lower;
  double best_lower = bounds.lower;
  bool first = true;
  for (auto& e : node.edges) {
    double su = 0.0;
    double sl = 0.0;
    for (const auto& c : e.children) {
      const double w = static_cast<double>(c.count) * inv;
      su += w * c.node->upper;
      sl += w * c.node->lower;
    }
    e.upper = std::clamp(e.mean_reward + gamma * su, bounds.lower, bounds.upper);
    e.lower = std::clamp(e.mean_reward + gamma * sl, bounds.lower, bounds.upper);
    if (first || e.upper > best_upper) best_upper = e.upper;
    if (first || e.lower > best_lower) best_lower = e.lower;
    first = false;
  }
  node.upper = best_upper;
  node.lower = best_lower;
}

/// Forward Search Sparse Sampling over any generative model.
template <class State, class Hash = std::hash<State>>
class Fsss {
 public:
  using Tree = SearchTree<State, Hash>;
  using Node = SearchNode<State>;

  Fsss(const GenerativeModel<State>& model, FsssParams params, const State& root)
      : model_(&model), tree_(params, search_bounds(model, params.depth)) {
    params.validate();
    auto [node, created] = tree_.get_or_create(root, 0);
    init_node(*node);
    tree_.set_root(node);
  }

  /// One trajectory from the root.
  void rollout(Rng& rng) { rollout(*tree_.root(), 0, rng); }

  /// Up to t rollouts (fewer once the root closes, if early_stop is set).
  /// Returns the number of rollouts performed.
  int run(Rng& rng) {
    const auto& p = tree_.params();
    int done = 0;
    for (; done < p.trajectories; ++done) {
      if (p.early_stop && converged()) break;
      rollout(rng);
    }
    return done;
  }

  /// max_a U(root, a); 0 for a terminal root.
  double value() const {
    const Node* r = tree_.root();
    if (r->terminal) return 0.0;
    return r->upper;
  }

  bool converged() const {
    const Node* r = tree_.root();
    return r->upper - r->lower < kClosedGap;
  }

  Tree& tree() { return tree_; }
  const Tree& tree() const { return tree_; }
  Tree release_tree() && { return std::move(tree_); }

 private:
  // A node at depth l has d - l steps left before the zero-valued leaves,
  // so it can be bounded by the model's horizon bounds for that many steps.
  static std::vector<ValueBounds> search_bounds(const GenerativeModel<State>& model, int depth) {
    std::vector<ValueBounds> out;
    const auto v = model.value_bounds();
    for (int l = 0; l <= depth; ++l) {
      const auto h = model.horizon_bounds(depth - l);
      out.push_back({std::min({std::max(h.lower, v.lower), 0.0}), std::max({std::min(h.upper, v.upper), 0.0})});
    }
    return out;
  }

  void init_node(Node& n) {
    n.terminal = model_->is_terminal(*n.state);
    if (n.terminal || n.depth >= tree_.params().depth) {
      n.upper = n.lower = 0.0;
    } else {
      n.upper = tree_.bounds(n.depth).upper;
      n.lower = tree_.bounds(n.depth).lower;
    }
  }

  void expand(Node& node, Rng& rng) {
    const auto& p = tree_.params();
    const int A = model_->num_actions();
    node.visited = true;
    node.edges.assign(static_cast<std::size_t>(A), {});
    for (ActionId a = 0; a < A; ++a) {
      auto& edge = node.edges[static_cast<std::size_t>(a)];
      for (int c = 0; c < p.samples; ++c) {
        auto [next, r] = model_->sample(*node.state, a, rng);
        tree_.count_query();
        auto [child, created] = tree_.get_or_create(next, node.depth + 1);
        if (created) init_node(*child);
        auto it = std::find_if(edge.children.begin(), edge.children.end(),
                               [child](const typename Node::Child& x) { return x.node == child; });
        if (it == edge.children.end()) {
          edge.children.push_back({child, 1});
        } else {
          ++it->count;
        }
        edge.mean_reward += r / static_cast<double>(p.samples);
      }
    }
    bellman_backup(node, model_->discount(), p.samples, tree_.bounds(node.depth));
  }

  void rollout(Node& node, int level, Rng& rng) {
    if (node.terminal) {
      node.upper = node.lower = 0.0;
      return;
    }
    if (level == tree_.params().depth) return;
    if (!node.visited) expand(node, rng);

    std::size_t best_a = 0;
    for (std::size_t a = 1; a < node.edges.size(); ++a) {
      if (node.edges[a].upper > node.edges[best_a].upper) best_a = a;
    }
    const auto& children = node.edges[best_a].children;
    std::size_t best_c = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < children.size(); ++i) {
      const auto* ch = children[i].node;
      const double score = (ch->upper - ch->lower) * static_cast<double>(children[i].count);
      if (score > best_score) {
        best_score = score;
        best_c = i;
      }
    }
    rollout(*children[best_c].node, level + 1, rng);
    bellman_backup(node, model_->discount(), tree_.params().samples, tree_.bounds(node.depth));
  }

  const GenerativeModel<State>* model_;
  Tree tree_;
};

template <class State, class Hash = std::hash<State>>
struct FsssResult {
  double value;
  int rollouts;
  SearchTree<State, Hash> tree;
};

/// Runs t rollouts from `s` and returns max_a U at the root with the tree.
template <class State, class Hash = std::hash<State>>
FsssResult<State, Hash> fsss_estimate(const State& s, const FsssParams& params, const GenerativeModel<State>& model,
                                      Rng& rng) {
  Fsss<State, Hash> search(model, params, s);
  const int n = search.run(rng);
  const double v = search.value();
  return {v, n, std::move(search).release_tree()};
}

enum class RootActionRule { kLowerBound, kUpperBound };

/// Action to execute from a finished search: argmax of the root's lower
/// bound (or upper, on request), ties to the lowest index.
template <class State, class Hash>
ActionId best_root_action(const SearchTree<State, Hash>& tree, RootActionRule rule = RootActionRule::kLowerBound) {
  const auto* root = tree.root();
  if (root == nullptr || !root->visited) {
    throw std::logic_error("best_root_action: root has not been expanded");
  }
  ActionId best = 0;
  auto key = [rule](const typename SearchNode<State>::Edge& e) {
    return rule == RootActionRule::kLowerBound ? e.lower : e.upper;
  };
  for (std::size_t a = 1; a < root->edges.size(); ++a) {
    if (key(root->edges[a]) > key(root->edges[static_cast<std::size_t>(best)])) best = static_cast<ActionId>(a);
  }
  return best;
}

/// One line per node, in creation order: `depth state U L visited`.
template <class State, class Hash, class Formatter>
void dump_tree(std::ostream& out, const SearchTree<State, Hash>& tree, Formatter&& format_state) {
  for (const auto* n : tree.nodes()) {
    out << n->depth << ' ' << format_state(*n->state) << ' ' << n->upper << ' ' << n->lower << ' '
        << (n->visited ? 1 : 0) << '\n';
  }
}

template <class State, class Hash>
void dump_tree(std::ostream& out, const SearchTree<State, Hash>& tree) {
  dump_tree(out, tree, [](const State& s) -> const State& { return s; });
}

// ---------------------------------------------------------------------------
// Sparse Sampling

struct SparseSamplingResult {
  double value = 0.0;
  ActionId best_action = 0;
};

inline constexpr double kSparseSamplingNodeLimit = 1e6;

namespace detail {

inline void check_sparse_sampling_size(int num_actions, int samples, int depth) {
  const double nodes = std::pow(static_cast<double>(num_actions) * samples, depth);
  if (nodes > kSparseSamplingNodeLimit) {
    throw std::invalid_argument("sparse_sampling_exact: (A*C)^d exceeds the node limit");
  }
}

template <class State>
double sparse_sampling_value(const State& s, int remaining, int samples, const GenerativeModel<State>& model,
                             Rng& rng, ActionId* best_action) {
  if (model.is_terminal(s) || remaining == 0) {
    if (best_action) *best_action = 0;
    return 0.0;
  }
  const double gamma = model.discount();
  double best = 0.0;
  ActionId arg = 0;
  for (ActionId a = 0; a < model.num_actions(); ++a) {
    double mean_reward = 0.0;
    double continuation = 0.0;
    for (int c = 0; c < samples; ++c) {
      auto [next, r] = model.sample(s, a, rng);
      mean_reward += r / static_cast<double>(samples);
      continuation += sparse_sampling_value(next, remaining - 1, samples, model, rng, nullptr) /
                      static_cast<double>(samples);
    }
    const double q = mean_reward + gamma * continuation;
    if (a == 0 || q > best) {
      best = q;
      arg = a;
    }
  }
  if (best_action) *best_action = arg;
  return best;
}

}  // namespace detail

/// Full Sparse Sampling tree of depth d with C samples per action; leaves
/// are worth 0. Rejects trees with more than 1e6 nodes.
template <class State>
SparseSamplingResult sparse_sampling_exact(const State& s, int depth, int samples, const GenerativeModel<State>& model,
                                           Rng& rng) {
  if (depth < 0 || samples < 1) throw std::invalid_argument("sparse_sampling_exact: bad depth or C");
  detail::check_sparse_sampling_size(model.num_actions(), samples, depth);
  SparseSamplingResult out;
  out.value = detail::sparse_sampling_value(s, depth, samples, model, rng, &out.best_action);
  return out;
}

/// Sparse Sampling evaluated on the children an FSSS tree already sampled.
///
/// Wherever the FSSS tree expanded a (state, depth) node, its sampled
/// children and mean rewards are reused verbatim; elsewhere C fresh samples
/// per action are drawn once and shared by every visit to that node. The
/// resulting value is the one Sparse Sampling would compute had it drawn the
/// same samples as FSSS.
template <class State, class Hash = std::hash<State>>
class SharedTreeSparseSampling {
 public:
  SharedTreeSparseSampling(const SearchTree<State, Hash>& tree, const GenerativeModel<State>& model, Rng& rng)
      : tree_(&tree), model_(&model), rng_(&rng) {
    detail::check_sparse_sampling_size(model.num_actions(), tree.params().samples, tree.params().depth);
  }

  double value(const State& s, int depth) { return evaluate(s, depth).value; }

  SparseSamplingResult root() { return evaluate(*tree_->root()->state, 0); }

 private:
  struct SampledEdge {
    double mean_reward = 0.0;
    std::vector<std::pair<State, int>> children;
  };
  struct Key {
    State state;
    int depth;
    bool operator==(const Key& o) const { return depth == o.depth && state == o.state; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(hash_combine(static_cast<std::uint64_t>(Hash{}(k.state)),
                                                   static_cast<std::uint64_t>(k.depth)));
    }
  };

  SparseSamplingResult evaluate(const State& s, int depth) {
    if (model_->is_terminal(s) || depth >= tree_->params().depth) return {0.0, 0};
    const Key key{s, depth};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    const int C = tree_->params().samples;
    const double inv = 1.0 / static_cast<double>(C);
    const double gamma = model_->discount();
    SparseSamplingResult out;
    const auto* node = tree_->find(s, depth);
    for (ActionId a = 0; a < model_->num_actions(); ++a) {
      double q = 0.0;
      if (node != nullptr && node->visited) {
        const auto& edge = node->edges[static_cast<std::size_t>(a)];
        double cont = 0.0;
        for (const auto& c : edge.children) {
          cont += static_cast<double>(c.count) * inv * evaluate(*c.node->state, depth + 1).value;
        }
        q = edge.mean_reward + gamma * cont;
      } else {
        const SampledEdge edge = sampled_edge(key, a);
        double cont = 0.0;
        for (const auto& [child, count] : edge.children) {
          cont += static_cast<double>(count) * inv * evaluate(child, depth + 1).value;
        }
        q = edge.mean_reward + gamma * cont;
      }
      if (a == 0 || q > out.value) {
        out.value = q;
        out.best_action = a;
      }
    }
    memo_.emplace(key, out);
    return out;
  }

  SampledEdge sampled_edge(const Key& key, ActionId a) {
    auto& edges = fresh_[key];
    if (edges.empty()) {
      const int C = tree_->params().samples;
      edges.resize(static_cast<std::size_t>(model_->num_actions()));
      for (ActionId b = 0; b < model_->num_actions(); ++b) {
        auto& e = edges[static_cast<std::size_t>(b)];
        for (int c = 0; c < C; ++c) {
          auto [next, r] = model_->sample(key.state, b, *rng_);
          auto it = std::find_if(e.children.begin(), e.children.end(),
                                 [&](const auto& x) { return x.first == next; });
          if (it == e.children.end()) {
            e.children.emplace_back(std::move(next), 1);
          } else {
            ++it->second;
          }
          e.mean_reward += r / static_cast<double>(C);
        }
      }
    }
    return edges[static_cast<std::size_t>(a)];
  }

  const SearchTree<State, Hash>* tree_;
  const GenerativeModel<State>* model_;
  Rng* rng_;
  std::unordered_map<Key, SparseSamplingResult, KeyHash> memo_;
  std::unordered_map<Key, std::vector<SampledEdge>, KeyHash> fresh_;
};

}  // namespace bfs3
