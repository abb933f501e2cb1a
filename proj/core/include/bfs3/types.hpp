#pragma once

#include <cstdint>
#include <random>

namespace bfs3 {

using StateId = int;
using ActionId = int;

/// Every sampling operation takes an explicit stream; there is no global RNG.
using Rng = std::mt19937_64;

template <class State>
struct Transition {
  State next;
  double reward = 0.0;
};

using TransitionSample = Transition<StateId>;

struct ValueBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds on the discounted return, V = r / (1 - gamma) at either end.
inline ValueBounds geometric_value_bounds(double r_min, double r_max, double gamma) {
  return {r_min / (1.0 - gamma), r_max / (1.0 - gamma)};
}

/// Bounds on the return of at most `steps` more steps:
/// r * (1 - gamma^steps) / (1 - gamma) at either end.
inline ValueBounds geometric_horizon_bounds(double r_min, double r_max, double gamma, int steps) {
  double g = 0.0;
  double w = 1.0;
  for (int k = 0; k < steps; ++k, w *= gamma) g += w;
  return {r_min * g, r_max * g};
}

/// Intersection of two bounds (a cap known from the domain, say).
inline ValueBounds intersect(ValueBounds a, ValueBounds b) {
  return {a.lower > b.lower ? a.lower : b.lower, a.upper < b.upper ? a.upper : b.upper};
}

/// No cap at all.
inline constexpr ValueBounds kUnbounded{-1e300, 1e300};

/// Generative access to an MDP: the oracle queried by every planner here.
///
/// Implementations must be bit-reproducible given the same rng state and
/// safe to call concurrently from independent searches (const, no shared
/// mutable state).
template <class State>
class GenerativeModel {
 public:
  using state_type = State;

  virtual ~GenerativeModel() = default;

  virtual Transition<State> sample(const State& s, ActionId a, Rng& rng) const = 0;
  virtual bool is_terminal(const State& s) const = 0;
  virtual int num_actions() const = 0;
  virtual double discount() const = 0;
  virtual ValueBounds value_bounds() const = 0;
  /// Bounds on what at most `steps` further steps can collect. Defaults to
  /// value_bounds(); models with per-step reward bounds can do better.
  virtual ValueBounds horizon_bounds(int /*steps*/) const { return value_bounds(); }
};

using GenerativeMDP = GenerativeModel<StateId>;

// splitmix64 finalizer; used for every hash in the library.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
  return mix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

/// Derives an independent stream from (base seed, stream index, salt).
inline Rng derive_rng(std::uint64_t base_seed, std::uint64_t index, std::uint64_t salt = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(salt)};
  return Rng(seq);
}

}  // namespace bfs3
