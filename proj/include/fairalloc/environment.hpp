#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fairalloc/bandit.hpp"
#include "fairalloc/errors.hpp"
#include "fairalloc/random.hpp"

namespace fairalloc {

// A simulated teammate whose success probability saturates with practice:
//   skill(n) = max_skill - (max_skill - base_skill) * exp(-learning_rate * n)
struct TeammateModel {
  double base_skill = 0.5;
  double max_skill = 0.5;
  double learning_rate = 0.0;

  static TeammateModel constant(double skill) { return {skill, skill, 0.0}; }

  bool stationary() const { return learning_rate == 0.0 || max_skill == base_skill; }
};

inline double effective_skill(const TeammateModel& model, std::uint64_t allocations) {
  if (model.learning_rate == 0.0) return model.base_skill;
  const double gap = model.max_skill - model.base_skill;
  const double skill =
      model.max_skill - gap * std::exp(-model.learning_rate * static_cast<double>(allocations));
  // Clamp against rounding so the result never leaves [base_skill, max_skill].
  return std::clamp(skill, model.base_skill, model.max_skill);
}

enum class EnvKind { kCoTetris, kSpaceInvaders };

inline std::string_view to_string(EnvKind kind) {
  return kind == EnvKind::kCoTetris ? "co_tetris" : "space_invaders";
}

inline EnvKind parse_env_kind(std::string_view name) {
  if (name == "co_tetris") return EnvKind::kCoTetris;
  if (name == "space_invaders") return EnvKind::kSpaceInvaders;
  throw ConfigError("unknown env '" + std::string(name) +
                    "' (expected co_tetris or space_invaders)");
}

struct EnvConfig {
  EnvKind kind = EnvKind::kCoTetris;
  std::uint64_t horizon = 1;

  // Co-Tetris: one teammate per arm.
  std::vector<TeammateModel> teammates;

  // Space Invaders: per-side elimination probability per tick, plus the boost
  // the supporting player adds to the chosen side.
  std::vector<double> base_rate{0.5, 0.5};
  double support_boost = 0.0;
  std::uint64_t epoch_length = 1;

  std::size_t arm_count() const {
    return kind == EnvKind::kCoTetris ? teammates.size() : std::size_t{2};
  }

  bool stationary() const {
    if (kind == EnvKind::kSpaceInvaders) return true;
    for (const auto& t : teammates) {
      if (!t.stationary()) return false;
    }
    return true;
  }
};

namespace detail {

inline bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace detail

inline void validate(const EnvConfig& config) {
  if (config.horizon == 0) throw ConfigError("horizon must be at least 1");
  if (config.kind == EnvKind::kCoTetris) {
    if (config.teammates.size() < 2) {
      throw ConfigError("teammates: co_tetris needs at least 2 teammates");
    }
    for (std::size_t i = 0; i < config.teammates.size(); ++i) {
      const auto& t = config.teammates[i];
      const std::string where = "teammates[" + std::to_string(i) + "]";
      if (!detail::is_probability(t.base_skill)) {
        throw ConfigError(where + ".p0 must lie in [0, 1]");
      }
      if (!detail::is_probability(t.max_skill)) {
        throw ConfigError(where + ".p_max must lie in [0, 1]");
      }
      if (t.max_skill < t.base_skill) throw ConfigError(where + ".p_max must be >= p0");
      if (!(t.learning_rate >= 0.0) || !std::isfinite(t.learning_rate)) {
        throw ConfigError(where + ".lambda must be a finite number >= 0");
      }
    }
  } else {
    if (config.base_rate.size() != 2) {
      throw ConfigError("base_rate: space_invaders needs one rate per side (2)");
    }
    if (!detail::is_probability(config.support_boost)) {
      throw ConfigError("support_boost must lie in [0, 1]");
    }
    for (double rate : config.base_rate) {
      if (!detail::is_probability(rate)) throw ConfigError("base_rate must lie in [0, 1]");
      if (rate + config.support_boost > 1.0) {
        throw ConfigError("base_rate + support_boost must not exceed 1");
      }
    }
    if (config.epoch_length == 0) throw ConfigError("epoch_length must be at least 1");
  }
}

struct StepOutcome {
  double reward = 0.0;
  std::vector<double> per_player_gain;
};

// One episode of either platform. Invariants: round <= horizon and the
// allocation counts sum to round.
class Environment {
 public:
  static Environment reset(const EnvConfig& config, std::uint64_t seed) {
    validate(config);
    return Environment(config, seed);
  }

  const EnvConfig& config() const { return config_; }
  EnvKind kind() const { return config_.kind; }
  std::size_t arm_count() const { return config_.arm_count(); }
  std::uint64_t round() const { return round_; }
  std::uint64_t horizon() const { return config_.horizon; }
  bool done() const { return round_ >= config_.horizon; }
  const std::vector<std::uint64_t>& allocations() const { return allocations_; }

  StepOutcome step(ArmId arm) {
    return kind() == EnvKind::kCoTetris ? step_co_tetris(arm) : step_space_invaders(arm);
  }

  // One falling block handed to `arm`: success with the teammate's current
  // skill, which then improves by one allocation.
  StepOutcome step_co_tetris(ArmId arm) {
    if (kind() != EnvKind::kCoTetris) throw UsageError("not a co_tetris environment");
    check_step(arm);
    const double skill = effective_skill(config_.teammates[arm], allocations_[arm]);
    const bool placed = rng_.bernoulli(skill);
    StepOutcome out;
    out.reward = placed ? 1.0 : 0.0;
    out.per_player_gain.assign(arm_count(), 0.0);
    out.per_player_gain[arm] = out.reward;
    ++allocations_[arm];
    ++round_;
    return out;
  }

  // One decision epoch: every tick each side eliminates an enemy with its
  // base rate, the supported side with base rate + boost. Reward is the
  // team's eliminations over the epoch maximum.
  StepOutcome step_space_invaders(ArmId supported_side) {
    if (kind() != EnvKind::kSpaceInvaders) throw UsageError("not a space_invaders environment");
    check_step(supported_side);
    StepOutcome out;
    out.per_player_gain.assign(2, 0.0);
    for (std::uint64_t tick = 0; tick < config_.epoch_length; ++tick) {
      for (std::size_t side = 0; side < 2; ++side) {
        const double p =
            config_.base_rate[side] + (side == supported_side ? config_.support_boost : 0.0);
        if (rng_.bernoulli(p)) out.per_player_gain[side] += 1.0;
      }
    }
    const double eliminations = out.per_player_gain[0] + out.per_player_gain[1];
    out.reward = eliminations / (2.0 * static_cast<double>(config_.epoch_length));
    ++allocations_[supported_side];
    ++round_;
    return out;
  }

  // Expected reward of allocating to each arm in the current state.
  std::vector<double> true_means() const {
    std::vector<double> means(arm_count());
    if (kind() == EnvKind::kCoTetris) {
      for (ArmId i = 0; i < means.size(); ++i) {
        means[i] = effective_skill(config_.teammates[i], allocations_[i]);
      }
    } else {
      const double both = config_.base_rate[0] + config_.base_rate[1];
      for (ArmId i = 0; i < 2; ++i) means[i] = (both + config_.support_boost) / 2.0;
    }
    return means;
  }

 private:
  Environment(const EnvConfig& config, std::uint64_t seed)
      : config_(config), allocations_(config.arm_count(), 0), rng_(seed) {}

  void check_step(ArmId arm) const {
    if (done()) {
      throw UsageError("episode finished: round " + std::to_string(round_) +
                       " reached horizon " + std::to_string(config_.horizon));
    }
    if (arm >= arm_count()) {
      throw UsageError("arm " + std::to_string(arm) + " out of range for " +
                       std::to_string(arm_count()) + " arms");
    }
  }

  EnvConfig config_;
  std::vector<std::uint64_t> allocations_;
  std::uint64_t round_ = 0;
  Rng rng_;
};

}  // namespace fairalloc
