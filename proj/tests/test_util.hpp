#pragma once

#include <cstdint>
#include <vector>

#include "fairalloc/bandit.hpp"
#include "fairalloc/metrics.hpp"
#include "fairalloc/random.hpp"

namespace fairalloc::testing {

// Trace with the given arm sequence; rewards are zero.
inline EpisodeTrace scripted_trace(std::size_t k, Rational v, const std::vector<ArmId>& arms) {
  EpisodeTrace trace;
  trace.arm_count = k;
  trace.min_rate = v;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    trace.records.push_back({i + 1, arms[i], DecisionReason::kBaseline, 0.0, {}});
  }
  return trace;
}

// Plays `horizon` rounds of `state` against Bernoulli arms with the given
// means and returns the decision sequence. Rewards come from `reward_rng`,
// policy randomness from `policy_rng`.
inline std::vector<Decision> play_bernoulli(PolicyState& state, const std::vector<double>& means,
                                            std::uint64_t horizon, Rng& reward_rng,
                                            Rng& policy_rng) {
  std::vector<Decision> decisions;
  decisions.reserve(horizon);
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const Decision d = select_arm(state, policy_rng);
    update(state, d.arm, reward_rng.bernoulli(means[d.arm]) ? 1.0 : 0.0);
    decisions.push_back(d);
  }
  return decisions;
}

inline PolicyState make_strict(std::size_t k, Rational v, double coeff = 2.0) {
  PolicyConfig cfg;
  cfg.kind = PolicyKind::kStrictRateUcb;
  cfg.fairness.min_rate = v;
  cfg.fairness.exploration_coeff = coeff;
  return make_policy(cfg, k);
}

}  // namespace fairalloc::testing
