#pragma once

// Verification oracles for propagation: exact enumeration over every
// stochastic choice, and seeded Monte Carlo sampling.
//
// Both evaluate the same coin-level world semantics:
//  - a leaf obstacle occurs iff its probability coin lands true;
//  - an AND node holds iff all children hold and its joint coin lands true;
//  - an OR node holds iff some child holds and that child's coin lands true;
//  - a leaf goal is violated iff some obstructing obstacle occurs and its
//    obstruction coin lands true.
// Every coin is drawn independently, so under independence the expectations
// equal the closed forms used by propagate().

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "gorisk/model.hpp"

namespace gorisk {

inline constexpr double kConfidenceZ = 4.0;
inline constexpr std::size_t kDefaultCoinBudget = 24;

/// Counter-based random stream: the draw for coin `c` of sample `k` depends
/// only on (seed, k, c), never on draw order or on which thread asks.
class CoinStream {
 public:
  CoinStream(std::uint64_t seed, std::uint64_t sample_index)
      : key_(mix(seed ^ mix(sample_index + 0x632be59bd9b4e019ULL))) {}

  double uniform(std::uint64_t coin) const {
    std::uint64_t bits = mix(key_ ^ mix(coin + 0x8cb92ba72f3d8dd7ULL));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }
  bool flip(std::uint64_t coin, double probability) const {
    return uniform(coin) < probability;
  }

 private:
  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

/// One sampled world: obstacle occurrence and goal satisfaction.
struct World {
  std::map<NodeId, bool> obstacle_occurs;
  std::map<NodeId, bool> goal_satisfied;
};

struct SimulationResult {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::map<NodeId, double> empirical_obstacle_freq;
  std::map<NodeId, double> empirical_goal_freq;
  std::map<NodeId, double> confidence_radius;

  friend bool operator==(const SimulationResult&, const SimulationResult&) = default;
};

class CoinBudgetExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

namespace detail {

inline constexpr std::size_t kNoCoin = std::numeric_limits<std::size_t>::max();

struct CompiledInput {
  std::size_t node;
  std::size_t coin;
};

enum class StepKind { leaf_obstacle, all_of, any_of, leaf_goal };

struct Step {
  NodeId id;
  bool is_goal = false;
  StepKind kind = StepKind::leaf_obstacle;
  std::size_t coin = kNoCoin;  // leaf draw or AND joint coin
  std::vector<CompiledInput> inputs;
};

/// The model flattened into topologically ordered steps over indexed coins.
struct CompiledModel {
  std::vector<Step> steps;
  std::vector<double> coin_probability;

  explicit CompiledModel(const GoalModel& model) {
    auto order = topological_order(model);
    std::map<NodeId, std::size_t> index;
    for (std::size_t i = 0; i < order.size(); ++i) index[order[i]] = i;
    auto new_coin = [&](double p) {
      coin_probability.push_back(p);
      return coin_probability.size() - 1;
    };

    for (const auto& id : order) {
      Step step;
      step.id = id;
      step.is_goal = model.is_goal(id);
      const Refinement* r = model.refinement_of(id);
      if (r) {
        step.kind = r->kind == RefinementKind::And ? StepKind::all_of : StepKind::any_of;
        for (std::size_t i = 0; i < r->children.size(); ++i) {
          std::size_t coin =
              r->kind == RefinementKind::Or ? new_coin(r->child_conditional(i)) : kNoCoin;
          step.inputs.push_back({index.at(r->children[i]), coin});
        }
        if (r->kind == RefinementKind::And) step.coin = new_coin(r->and_conditional);
      } else if (step.is_goal) {
        step.kind = StepKind::leaf_goal;
        for (const auto* ob : model.obstructions_of(id))
          step.inputs.push_back({index.at(ob->obstacle), new_coin(ob->conditional)});
      } else {
        step.kind = StepKind::leaf_obstacle;
        step.coin = new_coin(*model.find_obstacle(id)->probability);
      }
      steps.push_back(std::move(step));
    }
  }

  /// Fills `state` (one flag per step). `coin(i)` yields coin i's outcome and
  /// is consulted only when the outcome matters.
  template <class CoinFn>
  void evaluate(CoinFn&& coin, std::vector<char>& state) const {
    state.assign(steps.size(), 0);
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const Step& step = steps[s];
      bool value = false;
      switch (step.kind) {
        case StepKind::leaf_obstacle:
          value = coin(step.coin);
          break;
        case StepKind::all_of:
          value = std::all_of(step.inputs.begin(), step.inputs.end(),
                              [&](const CompiledInput& in) { return state[in.node] != 0; }) &&
                  coin(step.coin);
          break;
        case StepKind::any_of:
          for (const auto& in : step.inputs) {
            if (state[in.node] && coin(in.coin)) {
              value = true;
              break;
            }
          }
          break;
        case StepKind::leaf_goal:
          value = true;
          for (const auto& in : step.inputs) {
            if (state[in.node] && coin(in.coin)) {
              value = false;
              break;
            }
          }
          break;
      }
      state[s] = value ? 1 : 0;
    }
  }
};

// Neumaier compensated summation.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace detail

/// Draws one world. `stream.flip(coin, p)` must return true with probability
/// p, independently per coin index.
template <class Stream>
World sample_world(const GoalModel& model, const Stream& stream) {
  detail::CompiledModel compiled(model);
  std::vector<char> state;
  compiled.evaluate(
      [&](std::size_t c) { return stream.flip(c, compiled.coin_probability[c]); },
      state);
  World world;
  for (std::size_t s = 0; s < compiled.steps.size(); ++s) {
    const auto& step = compiled.steps[s];
    (step.is_goal ? world.goal_satisfied : world.obstacle_occurs)[step.id] = state[s] != 0;
  }
  return world;
}

/// Number of coins whose probability is strictly between 0 and 1.
inline std::size_t stochastic_coin_count(const GoalModel& model) {
  detail::CompiledModel compiled(model);
  return static_cast<std::size_t>(std::count_if(
      compiled.coin_probability.begin(), compiled.coin_probability.end(),
      [](double p) { return p > 0.0 && p < 1.0; }));
}

/// Exact occurrence (obstacles) and satisfaction (goals) probabilities by
/// enumerating every outcome of every stochastic coin.
inline std::map<NodeId, double> brute_force_exact(
    const GoalModel& model, std::size_t coin_budget = kDefaultCoinBudget) {
  detail::CompiledModel compiled(model);
  const std::size_t n_coins = compiled.coin_probability.size();
  std::vector<std::size_t> free_coins;
  std::vector<char> outcome(n_coins, 0);
  for (std::size_t c = 0; c < n_coins; ++c) {
    double p = compiled.coin_probability[c];
    if (p > 0.0 && p < 1.0)
      free_coins.push_back(c);
    else
      outcome[c] = p >= 1.0 ? 1 : 0;
  }
  if (free_coins.size() > coin_budget)
    throw CoinBudgetExceeded("brute_force_exact: " + std::to_string(free_coins.size()) +
                             " stochastic coins exceed the budget of " +
                             std::to_string(coin_budget));

  std::vector<detail::CompensatedSum> totals(compiled.steps.size());
  std::vector<char> state;
  auto coin_fn = [&](std::size_t c) { return outcome[c] != 0; };

  // Depth-first over free coins, carrying the product weight of the prefix.
  auto recurse = [&](auto&& self, std::size_t depth, double weight) -> void {
    if (weight == 0.0) return;
    if (depth == free_coins.size()) {
      compiled.evaluate(coin_fn, state);
      for (std::size_t s = 0; s < state.size(); ++s)
        if (state[s]) totals[s].add(weight);
      return;
    }
    std::size_t c = free_coins[depth];
    double p = compiled.coin_probability[c];
    outcome[c] = 1;
    self(self, depth + 1, weight * p);
    outcome[c] = 0;
    self(self, depth + 1, weight * (1.0 - p));
  };
  recurse(recurse, 0, 1.0);

  std::map<NodeId, double> exact;
  for (std::size_t s = 0; s < compiled.steps.size(); ++s)
    exact[compiled.steps[s].id] = totals[s].value();
  return exact;
}

/// Seeded Monte Carlo estimate. Sample k always uses CoinStream(seed, k), so
/// the result does not depend on `workers`.
inline SimulationResult estimate(const GoalModel& model, std::size_t n_samples,
                                 std::uint64_t seed, unsigned workers = 1) {
  if (n_samples == 0) throw std::invalid_argument("estimate: n_samples must be >= 1");
  detail::CompiledModel compiled(model);
  const std::size_t n_steps = compiled.steps.size();
  workers = std::max(1u, workers);
  if (workers > n_samples) workers = static_cast<unsigned>(n_samples);

  std::vector<std::vector<std::uint64_t>> counts(workers,
                                                 std::vector<std::uint64_t>(n_steps, 0));
  auto run_range = [&](unsigned w, std::size_t begin, std::size_t end) {
    std::vector<char> state;
    auto& mine = counts[w];
    for (std::size_t k = begin; k < end; ++k) {
      CoinStream stream(seed, k);
      compiled.evaluate(
          [&](std::size_t c) { return stream.flip(c, compiled.coin_probability[c]); },
          state);
      for (std::size_t s = 0; s < n_steps; ++s) mine[s] += static_cast<std::uint64_t>(state[s]);
    }
  };

  std::vector<std::thread> threads;
  std::size_t chunk = n_samples / workers;
  std::size_t begin = 0;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t end = w + 1 == workers ? n_samples : begin + chunk;
    if (w + 1 == workers)
      run_range(w, begin, end);
    else
      threads.emplace_back(run_range, w, begin, end);
    begin = end;
  }
  for (auto& t : threads) t.join();

  SimulationResult result;
  result.samples = n_samples;
  result.seed = seed;
  const double n = static_cast<double>(n_samples);
  for (std::size_t s = 0; s < n_steps; ++s) {
    std::uint64_t total = 0;
    for (const auto& c : counts) total += c[s];
    double f = static_cast<double>(total) / n;
    const auto& step = compiled.steps[s];
    (step.is_goal ? result.empirical_goal_freq : result.empirical_obstacle_freq)[step.id] = f;
    result.confidence_radius[step.id] = kConfidenceZ * std::sqrt(f * (1.0 - f) / n);
  }
  return result;
}

struct Deviation {
  NodeId id;
  double reference = 0.0;
  double empirical = 0.0;
  double radius = 0.0;
  bool within = true;
};

/// Compares each node's empirical frequency with a reference probability
/// (obstacle occurrence / goal satisfaction). A 1e-12 slack absorbs
/// rounding in references that are exactly 0 or 1 in theory.
inline std::vector<Deviation> compare_to_reference(
    const SimulationResult& sim, const std::map<NodeId, double>& reference) {
  std::vector<Deviation> out;
  auto check = [&](const std::map<NodeId, double>& freq) {
    for (const auto& [id, f] : freq) {
      auto ref = reference.find(id);
      if (ref == reference.end()) continue;
      double radius = sim.confidence_radius.at(id);
      out.push_back({id, ref->second, f, radius,
                     std::abs(f - ref->second) <= radius + 1e-12});
    }
  };
  check(sim.empirical_obstacle_freq);
  check(sim.empirical_goal_freq);
  std::sort(out.begin(), out.end(),
            [](const Deviation& a, const Deviation& b) { return a.id < b.id; });
  return out;
}

}  // namespace gorisk
