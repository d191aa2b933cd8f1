#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "fairalloc/errors.hpp"
#include "fairalloc/random.hpp"
#include "fairalloc/rational.hpp"

namespace fairalloc {

// Index of one teammate (arm) in [0, k).
using ArmId = std::size_t;

enum class PolicyKind {
  kStrictRateUcb,
  kUcb1,
  kRoundRobin,
  kEpsilonGreedy,
  kUniform,
  kOracle,
};

inline std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kStrictRateUcb: return "strict_rate_ucb";
    case PolicyKind::kUcb1: return "ucb1";
    case PolicyKind::kRoundRobin: return "round_robin";
    case PolicyKind::kEpsilonGreedy: return "epsilon_greedy";
    case PolicyKind::kUniform: return "uniform";
    case PolicyKind::kOracle: return "oracle";
  }
  return "unknown";
}

inline PolicyKind parse_policy_kind(std::string_view name) {
  for (auto kind : {PolicyKind::kStrictRateUcb, PolicyKind::kUcb1, PolicyKind::kRoundRobin,
                    PolicyKind::kEpsilonGreedy, PolicyKind::kUniform, PolicyKind::kOracle}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown policy '" + std::string(name) +
                    "' (expected strict_rate_ucb, ucb1, round_robin, epsilon_greedy, "
                    "uniform or oracle)");
}

inline bool is_baseline(PolicyKind kind) {
  return kind != PolicyKind::kStrictRateUcb && kind != PolicyKind::kUcb1;
}

enum class DecisionReason { kUcbExploit, kFairnessOverride, kInitialization, kBaseline };

inline std::string_view to_string(DecisionReason reason) {
  switch (reason) {
    case DecisionReason::kUcbExploit: return "UcbExploit";
    case DecisionReason::kFairnessOverride: return "FairnessOverride";
    case DecisionReason::kInitialization: return "Initialization";
    case DecisionReason::kBaseline: return "Baseline";
  }
  return "Unknown";
}

struct Decision {
  ArmId arm = 0;
  DecisionReason reason = DecisionReason::kBaseline;

  friend bool operator==(const Decision&, const Decision&) = default;
};

struct ArmStats {
  std::uint64_t pull_count = 0;
  double reward_sum = 0.0;

  // Only meaningful when pull_count > 0.
  double mean() const { return reward_sum / static_cast<double>(pull_count); }
};

struct FairnessParams {
  Rational min_rate;
  double exploration_coeff = 2.0;
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kStrictRateUcb;
  FairnessParams fairness;
  double epsilon = 0.1;
  // True arm means; required by the oracle baseline, ignored otherwise.
  std::vector<double> oracle_means;
};

// The allocator's entire memory. Invariant: sum of pull counts equals
// rounds_elapsed.
struct PolicyState {
  PolicyKind kind = PolicyKind::kStrictRateUcb;
  FairnessParams params;
  double epsilon = 0.1;
  std::vector<double> oracle_means;
  std::vector<ArmStats> stats;
  std::uint64_t rounds_elapsed = 0;

  std::size_t arm_count() const { return stats.size(); }
};

inline void check_feasible(const Rational& min_rate, std::size_t arm_count) {
  if (!min_rate.scaled_at_most_one(arm_count)) {
    throw InfeasibleError("min_rate " + min_rate.to_string() + " is infeasible for " +
                          std::to_string(arm_count) + " arms (k * min_rate > 1)");
  }
}

inline PolicyState make_policy(const PolicyConfig& config, std::size_t arm_count) {
  if (arm_count == 0) throw ConfigError("policy needs at least one arm");
  if (config.fairness.min_rate.num() > config.fairness.min_rate.den()) {
    throw ConfigError("min_rate " + config.fairness.min_rate.to_string() + " exceeds 1");
  }
  check_feasible(config.fairness.min_rate, arm_count);
  if (!(config.fairness.exploration_coeff > 0.0) ||
      !std::isfinite(config.fairness.exploration_coeff)) {
    throw ConfigError("exploration_coeff must be a positive finite number");
  }
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
  if (config.kind == PolicyKind::kOracle && config.oracle_means.size() != arm_count) {
    throw ConfigError("oracle policy requires the true mean of every arm");
  }

  PolicyState state;
  state.kind = config.kind;
  state.params = config.fairness;
  state.epsilon = config.epsilon;
  state.oracle_means = config.oracle_means;
  state.stats.assign(arm_count, ArmStats{});
  return state;
}

// UCB1 index at round `round`: +inf for an unpulled arm, otherwise
// mean + sqrt(c * ln(round) / n).
inline double ucb_index(const ArmStats& stats, std::uint64_t round, double exploration_coeff) {
  if (stats.pull_count == 0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(stats.pull_count);
  return stats.mean() + std::sqrt(exploration_coeff * std::log(static_cast<double>(round)) / n);
}

// Per-arm quota after `round` rounds: floor(min_rate * round), exact.
inline std::uint64_t required_pulls(std::uint64_t round, const Rational& min_rate) {
  return min_rate.floor_times(round);
}

struct StarvingArm {
  ArmId arm = 0;
  std::uint64_t deficit = 0;

  friend bool operator==(const StarvingArm&, const StarvingArm&) = default;
};

// Arms below quota for the round about to be played, most starved first,
// ties to the lowest index.
inline std::vector<StarvingArm> starving_set(const PolicyState& state, std::uint64_t round) {
  const std::uint64_t quota = required_pulls(round, state.params.min_rate);
  std::vector<StarvingArm> starving;
  for (ArmId i = 0; i < state.arm_count(); ++i) {
    if (state.stats[i].pull_count < quota) {
      starving.push_back({i, quota - state.stats[i].pull_count});
    }
  }
  // Every arm shares one quota, so sorting by deficit is sorting by count;
  // stable sort keeps index order among equal deficits.
  std::stable_sort(starving.begin(), starving.end(),
                   [](const StarvingArm& a, const StarvingArm& b) { return a.deficit > b.deficit; });
  return starving;
}

namespace detail {

template <typename Score>
ArmId argmax_lowest(std::size_t arm_count, Score&& score) {
  ArmId best = 0;
  double best_value = score(0);
  for (ArmId i = 1; i < arm_count; ++i) {
    const double value = score(i);
    if (value > best_value) {
      best = i;
      best_value = value;
    }
  }
  return best;
}

inline void check_consistent(const PolicyState& state) {
  if (state.arm_count() == 0) throw UsageError("policy state has no arms");
  std::uint64_t total = 0;
  for (const auto& s : state.stats) total += s.pull_count;
  if (total != state.rounds_elapsed) {
    throw UsageError("policy state is inconsistent: pull counts sum to " + std::to_string(total) +
                     " but rounds_elapsed is " + std::to_string(state.rounds_elapsed));
  }
}

}  // namespace detail

inline Decision baseline_select(const PolicyState& state, Rng& rng) {
  const std::size_t k = state.arm_count();
  const std::uint64_t round = state.rounds_elapsed + 1;
  switch (state.kind) {
    case PolicyKind::kRoundRobin:
      return {static_cast<ArmId>((round - 1) % k), DecisionReason::kBaseline};
    case PolicyKind::kUniform:
      return {static_cast<ArmId>(rng.uniform_index(k)), DecisionReason::kBaseline};
    case PolicyKind::kEpsilonGreedy: {
      // The coin is always drawn so the stream advances identically for any epsilon.
      const bool explore = rng.uniform01() < state.epsilon;
      if (explore) return {static_cast<ArmId>(rng.uniform_index(k)), DecisionReason::kBaseline};
      // Unpulled arms count as +inf so each arm is tried before exploitation.
      const ArmId arm = detail::argmax_lowest(k, [&](ArmId i) {
        const auto& s = state.stats[i];
        return s.pull_count == 0 ? std::numeric_limits<double>::infinity() : s.mean();
      });
      return {arm, DecisionReason::kBaseline};
    }
    case PolicyKind::kOracle: {
      if (state.oracle_means.size() != k) {
        throw ConfigError("oracle policy requires the true mean of every arm");
      }
      return {detail::argmax_lowest(k, [&](ArmId i) { return state.oracle_means[i]; }),
              DecisionReason::kBaseline};
    }
    case PolicyKind::kStrictRateUcb:
    case PolicyKind::kUcb1:
      break;
  }
  throw UsageError("baseline_select called with non-baseline policy " +
                   std::string(to_string(state.kind)));
}

// Chooses the arm for round rounds_elapsed + 1. Does not modify the state.
//
// Strict-rate UCB: unpulled arms first (lowest index), then the most starved
// arm below the floor(v t) quota, then the UCB1 argmax. UCB1 is the same rule
// without the quota step.
inline Decision select_arm(const PolicyState& state, Rng& rng) {
  detail::check_consistent(state);
  check_feasible(state.params.min_rate, state.arm_count());
  if (is_baseline(state.kind)) return baseline_select(state, rng);

  const std::uint64_t round = state.rounds_elapsed + 1;
  for (ArmId i = 0; i < state.arm_count(); ++i) {
    if (state.stats[i].pull_count == 0) return {i, DecisionReason::kInitialization};
  }
  if (state.kind == PolicyKind::kStrictRateUcb) {
    const auto starving = starving_set(state, round);
    if (!starving.empty()) return {starving.front().arm, DecisionReason::kFairnessOverride};
  }
  const double c = state.params.exploration_coeff;
  const ArmId arm = detail::argmax_lowest(
      state.arm_count(), [&](ArmId i) { return ucb_index(state.stats[i], round, c); });
  return {arm, DecisionReason::kUcbExploit};
}

inline void update(PolicyState& state, ArmId arm, double reward) {
  if (arm >= state.arm_count()) {
    throw UsageError("arm " + std::to_string(arm) + " out of range for " +
                     std::to_string(state.arm_count()) + " arms");
  }
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw UsageError("reward " + std::to_string(reward) + " outside [0, 1]");
  }
  auto& s = state.stats[arm];
  ++s.pull_count;
  s.reward_sum += reward;
  ++state.rounds_elapsed;
}

}  // namespace fairalloc
