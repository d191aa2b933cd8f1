#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairalloc/bandit.hpp"
#include "fairalloc/errors.hpp"
#include "fairalloc/rational.hpp"

namespace fairalloc {

struct TraceRecord {
  std::uint64_t round = 0;
  ArmId arm = 0;
  DecisionReason reason = DecisionReason::kBaseline;
  double reward = 0.0;
  std::vector<double> per_player_gain;
};

// Ordered record of one episode. Rounds run 1..T without gaps.
struct EpisodeTrace {
  std::size_t arm_count = 0;
  Rational min_rate;
  std::vector<TraceRecord> records;

  std::uint64_t horizon() const { return records.size(); }
};

inline void check_trace(const EpisodeTrace& trace) {
  if (trace.arm_count == 0) throw UsageError("trace has no arms");
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    if (r.round != i + 1) {
      throw UsageError("trace rounds must be consecutive from 1; record " + std::to_string(i) +
                       " has round " + std::to_string(r.round));
    }
    if (r.arm >= trace.arm_count) {
      throw UsageError("trace record at round " + std::to_string(r.round) + " has arm " +
                       std::to_string(r.arm) + " >= k");
    }
  }
}

inline std::vector<std::uint64_t> allocation_counts(const EpisodeTrace& trace) {
  std::vector<std::uint64_t> counts(trace.arm_count, 0);
  for (const auto& r : trace.records) ++counts.at(r.arm);
  return counts;
}

inline double total_reward(const EpisodeTrace& trace) {
  double total = 0.0;
  for (const auto& r : trace.records) total += r.reward;
  return total;
}

// Sum over arms of (best mean - arm mean) * pulls.
inline double pseudo_regret(std::span<const std::uint64_t> counts, std::span<const double> means) {
  if (counts.size() != means.size()) {
    throw UsageError("pseudo_regret: " + std::to_string(counts.size()) + " counts but " +
                     std::to_string(means.size()) + " means");
  }
  if (means.empty()) return 0.0;
  const double best = *std::max_element(means.begin(), means.end());
  double regret = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    regret += (best - means[i]) * static_cast<double>(counts[i]);
  }
  return regret;
}

namespace detail {

inline void require_positive_total(std::span<const std::uint64_t> counts, const char* who) {
  if (std::none_of(counts.begin(), counts.end(), [](std::uint64_t c) { return c > 0; })) {
    throw UsageError(std::string(who) + ": counts must not be all zero");
  }
}

}  // namespace detail

// Jain's index (sum x)^2 / (k * sum x^2), in [1/k, 1].
inline double jain_index(std::span<const std::uint64_t> counts) {
  detail::require_positive_total(counts, "jain_index");
  unsigned __int128 sum = 0;
  unsigned __int128 sum_sq = 0;
  for (auto c : counts) {
    sum += c;
    sum_sq += static_cast<unsigned __int128>(c) * c;
  }
  const long double num = static_cast<long double>(sum * sum);
  const long double den = static_cast<long double>(sum_sq * counts.size());
  return static_cast<double>(num / den);
}

// Gini coefficient sum_i sum_j |x_i - x_j| / (2 k sum x), in [0, 1 - 1/k].
inline double gini(std::span<const std::uint64_t> counts) {
  detail::require_positive_total(counts, "gini");
  unsigned __int128 pair_diff = 0;
  unsigned __int128 sum = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    sum += counts[i];
    for (std::size_t j = 0; j < counts.size(); ++j) {
      pair_diff += counts[i] > counts[j] ? counts[i] - counts[j] : counts[j] - counts[i];
    }
  }
  const long double den = static_cast<long double>(2 * counts.size() * sum);
  return static_cast<double>(static_cast<long double>(pair_diff) / den);
}

namespace detail {

// Calls visit(round, counts_after_round) for every round of the trace.
template <typename Visit>
void for_each_running_count(const EpisodeTrace& trace, Visit&& visit) {
  std::vector<std::uint64_t> counts(trace.arm_count, 0);
  for (const auto& r : trace.records) {
    ++counts[r.arm];
    visit(r.round, counts);
  }
}

}  // namespace detail

// Number of (round t, arm i) pairs where the count after round t is below
// floor(min_rate * t).
inline std::uint64_t violation_count(const EpisodeTrace& trace) {
  check_trace(trace);
  std::uint64_t violations = 0;
  detail::for_each_running_count(trace, [&](std::uint64_t t, const auto& counts) {
    const std::uint64_t quota = required_pulls(t, trace.min_rate);
    for (auto c : counts) {
      if (c < quota) ++violations;
    }
  });
  return violations;
}

// Largest quota shortfall over every round and arm (0 if never below quota).
inline std::uint64_t max_deficit(const EpisodeTrace& trace) {
  check_trace(trace);
  std::uint64_t worst = 0;
  detail::for_each_running_count(trace, [&](std::uint64_t t, const auto& counts) {
    const std::uint64_t quota = required_pulls(t, trace.min_rate);
    for (auto c : counts) {
      if (c < quota) worst = std::max(worst, quota - c);
    }
  });
  return worst;
}

// Selection shares over consecutive non-overlapping windows. A trailing
// partial window is dropped.
inline std::vector<std::vector<double>> windowed_share(const EpisodeTrace& trace,
                                                       std::uint64_t window) {
  check_trace(trace);
  if (window == 0) throw UsageError("windowed_share: window must be positive");
  if (window > trace.horizon()) {
    throw UsageError("windowed_share: window " + std::to_string(window) +
                     " exceeds trace length " + std::to_string(trace.horizon()));
  }
  std::vector<std::vector<double>> series;
  const std::uint64_t full = trace.horizon() / window;
  series.reserve(full);
  for (std::uint64_t w = 0; w < full; ++w) {
    std::vector<double> share(trace.arm_count, 0.0);
    for (std::uint64_t t = w * window; t < (w + 1) * window; ++t) {
      share[trace.records[t].arm] += 1.0;
    }
    for (auto& s : share) s /= static_cast<double>(window);
    series.push_back(std::move(share));
  }
  return series;
}

inline constexpr double kDefaultDisparityThreshold = 0.2;
inline constexpr std::uint64_t kDefaultDisparityStart = 2;

// First round t >= start_round where |n_0(t) - n_1(t)| / t > threshold.
// Round 1 always has gap 1, hence the default start of 2.
inline std::optional<std::uint64_t> disparity_onset(const EpisodeTrace& trace, double threshold,
                                                    std::uint64_t start_round = kDefaultDisparityStart) {
  check_trace(trace);
  if (trace.arm_count != 2) {
    throw UsageError("disparity_onset is defined for two-arm traces, got k=" +
                     std::to_string(trace.arm_count));
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw UsageError("disparity_onset: threshold must lie in (0, 1]");
  }
  std::optional<std::uint64_t> onset;
  detail::for_each_running_count(trace, [&](std::uint64_t t, const auto& counts) {
    if (onset || t < start_round) return;
    const std::uint64_t gap = counts[0] > counts[1] ? counts[0] - counts[1] : counts[1] - counts[0];
    if (static_cast<double>(gap) > threshold * static_cast<double>(t)) onset = t;
  });
  return onset;
}

struct FairnessReport {
  std::vector<double> shares;
  double jain = 1.0;
  double gini = 0.0;
  std::uint64_t violations = 0;
  std::optional<std::uint64_t> disparity_onset;
};

inline FairnessReport fairness_report(const EpisodeTrace& trace,
                                      double threshold = kDefaultDisparityThreshold,
                                      std::uint64_t start_round = kDefaultDisparityStart) {
  check_trace(trace);
  if (trace.records.empty()) throw UsageError("fairness_report: empty trace");
  const auto counts = allocation_counts(trace);
  FairnessReport report;
  report.shares.reserve(counts.size());
  for (auto c : counts) {
    report.shares.push_back(static_cast<double>(c) / static_cast<double>(trace.horizon()));
  }
  report.jain = jain_index(counts);
  report.gini = gini(counts);
  report.violations = violation_count(trace);
  if (trace.arm_count == 2) report.disparity_onset = disparity_onset(trace, threshold, start_round);
  return report;
}

}  // namespace fairalloc
