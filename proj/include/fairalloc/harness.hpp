#pragma once

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fairalloc/bandit.hpp"
#include "fairalloc/config.hpp"
#include "fairalloc/environment.hpp"
#include "fairalloc/metrics.hpp"
#include "fairalloc/random.hpp"

namespace fairalloc {

inline constexpr std::string_view kResultsFormatVersion = "fairalloc-results/1";

// Metrics of one replication.
struct MetricRow {
  std::uint64_t rep = 0;
  double total_reward = 0.0;
  // Only defined for stationary environments.
  std::optional<double> pseudo_regret;
  std::vector<double> shares;
  double jain = 1.0;
  double gini = 0.0;
  std::uint64_t violations = 0;
  std::optional<std::uint64_t> disparity_onset;
};

struct ReplicationResult {
  EpisodeTrace trace;
  MetricRow row;
};

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) standard deviation, 0 when n = 1
};

// Mean and sample standard deviation, accumulated in the given order.
inline Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

struct Summary {
  Aggregate total_reward;
  std::optional<Aggregate> pseudo_regret;
  Aggregate jain;
  Aggregate gini;
  Aggregate violations;
};

struct RunResult {
  Rational min_rate;
  PolicyKind policy = PolicyKind::kStrictRateUcb;
  std::vector<MetricRow> rows;  // in rep_index order
  Summary summary;
  // Filled only when the config asks for traces.
  std::vector<EpisodeTrace> traces;
};

inline Summary summarize(std::span<const MetricRow> rows) {
  auto column = [&](auto get) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (const auto& r : rows) values.push_back(get(r));
    return aggregate(values);
  };
  Summary s;
  s.total_reward = column([](const MetricRow& r) { return r.total_reward; });
  s.jain = column([](const MetricRow& r) { return r.jain; });
  s.gini = column([](const MetricRow& r) { return r.gini; });
  s.violations = column([](const MetricRow& r) { return static_cast<double>(r.violations); });
  const bool has_regret =
      !rows.empty() &&
      std::all_of(rows.begin(), rows.end(), [](const MetricRow& r) { return r.pseudo_regret.has_value(); });
  if (has_regret) s.pseudo_regret = column([](const MetricRow& r) { return *r.pseudo_regret; });
  return s;
}

// Plays one episode. Both random streams are pure functions of
// (base_seed, rep_index), so the result never depends on which worker runs it.
inline ReplicationResult run_replication(const ExperimentConfig& config, std::uint64_t rep_index) {
  Environment env = Environment::reset(
      config.env, stream_seed(config.base_seed, rep_index, StreamRole::kEnvironment));
  Rng policy_rng(stream_seed(config.base_seed, rep_index, StreamRole::kPolicy));

  const std::vector<double> initial_means = env.true_means();
  PolicyConfig policy_config = config.policy;
  if (policy_config.kind == PolicyKind::kOracle) policy_config.oracle_means = initial_means;
  PolicyState policy = make_policy(policy_config, env.arm_count());

  ReplicationResult result;
  result.trace.arm_count = env.arm_count();
  result.trace.min_rate = config.policy.fairness.min_rate;
  result.trace.records.reserve(config.horizon());
  while (!env.done()) {
    const Decision decision = select_arm(policy, policy_rng);
    StepOutcome outcome = env.step(decision.arm);
    update(policy, decision.arm, outcome.reward);
    result.trace.records.push_back({env.round(), decision.arm, decision.reason, outcome.reward,
                                    std::move(outcome.per_player_gain)});
  }

  const FairnessReport fairness =
      fairness_report(result.trace, config.disparity_threshold, config.disparity_start);
  MetricRow& row = result.row;
  row.rep = rep_index;
  row.total_reward = total_reward(result.trace);
  if (config.env.stationary()) {
    row.pseudo_regret = pseudo_regret(allocation_counts(result.trace), initial_means);
  }
  row.shares = fairness.shares;
  row.jain = fairness.jain;
  row.gini = fairness.gini;
  row.violations = fairness.violations;
  row.disparity_onset = fairness.disparity_onset;
  return result;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs every replication (in parallel when threads > 1) and aggregates the
// rows in rep_index order.
inline RunResult run_experiment(const ExperimentConfig& config) {
  check_feasibility(config);
  const std::uint64_t reps = config.replications;
  RunResult result;
  result.min_rate = config.policy.fairness.min_rate;
  result.policy = config.policy.kind;
  result.rows.resize(reps);
  if (config.write_traces) result.traces.resize(reps);

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    while (!failed.load()) {
      const std::uint64_t rep = next.fetch_add(1);
      if (rep >= reps) return;
      try {
        ReplicationResult r = run_replication(config, rep);
        result.rows[rep] = std::move(r.row);
        if (config.write_traces) result.traces[rep] = std::move(r.trace);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };

  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(config.threads), reps));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  result.summary = summarize(result.rows);
  return result;
}

// One run_experiment per sweep value with a shared base_seed, so the fairness
// level is the only varying factor. Every value is checked before anything runs.
inline std::vector<RunResult> sweep(const ExperimentConfig& config) {
  if (config.sweep.empty()) throw ConfigError("sweep: expected a non-empty list of min_rate values");
  check_feasibility(config);
  std::vector<RunResult> rows;
  rows.reserve(config.sweep.size());
  for (const auto& v : config.sweep) {
    ExperimentConfig cell = config;
    cell.policy.fairness.min_rate = v;
    rows.push_back(run_experiment(cell));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Output files

// Shortest decimal that round-trips to the same double.
inline std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline constexpr std::string_view kSummaryHeader =
    "min_rate,policy,mean_total_reward,std_total_reward,mean_pseudo_regret,std_pseudo_regret,"
    "mean_jain,mean_gini,mean_violations";

inline constexpr std::string_view kTraceHeader = "rep,t,arm,reason,reward,cum_reward";

inline constexpr std::string_view kMissing = "NA";

inline void write_summary_row(std::ostream& os, const RunResult& r) {
  const auto& s = r.summary;
  os << r.min_rate.to_string() << ',' << to_string(r.policy) << ','
     << format_number(s.total_reward.mean) << ',' << format_number(s.total_reward.std) << ',';
  if (s.pseudo_regret) {
    os << format_number(s.pseudo_regret->mean) << ',' << format_number(s.pseudo_regret->std);
  } else {
    os << kMissing << ',' << kMissing;
  }
  os << ',' << format_number(s.jain.mean) << ',' << format_number(s.gini.mean) << ','
     << format_number(s.violations.mean) << '\n';
}

inline void write_summary_csv(std::ostream& os, std::span<const RunResult> results) {
  os << kSummaryHeader << '\n';
  for (const auto& r : results) write_summary_row(os, r);
}

// Per-replication metric rows; one share_<i> column per arm.
inline void write_replications_csv(std::ostream& os, std::span<const RunResult> results) {
  const std::size_t k = results.empty() || results.front().rows.empty()
                            ? 0
                            : results.front().rows.front().shares.size();
  os << "min_rate,policy,rep,total_reward,pseudo_regret";
  for (std::size_t i = 0; i < k; ++i) os << ",share_" << i;
  os << ",jain,gini,violations,disparity_onset\n";
  for (const auto& r : results) {
    for (const auto& row : r.rows) {
      os << r.min_rate.to_string() << ',' << to_string(r.policy) << ',' << row.rep << ','
         << format_number(row.total_reward) << ','
         << (row.pseudo_regret ? format_number(*row.pseudo_regret) : std::string(kMissing));
      for (double s : row.shares) os << ',' << format_number(s);
      os << ',' << format_number(row.jain) << ',' << format_number(row.gini) << ','
         << row.violations << ','
         << (row.disparity_onset ? std::to_string(*row.disparity_onset) : std::string(kMissing))
         << '\n';
    }
  }
}

// Decision trace rows without the header; `rep` may be omitted for
// single-episode printing.
inline void write_trace_rows(std::ostream& os, const EpisodeTrace& trace,
                             std::optional<std::uint64_t> rep) {
  double cumulative = 0.0;
  for (const auto& r : trace.records) {
    cumulative += r.reward;
    if (rep) os << *rep << ',';
    os << r.round << ',' << r.arm << ',' << to_string(r.reason) << ',' << format_number(r.reward)
       << ',' << format_number(cumulative) << '\n';
  }
}

inline void write_trace_csv(std::ostream& os, std::span<const EpisodeTrace> traces) {
  os << kTraceHeader << '\n';
  for (std::size_t rep = 0; rep < traces.size(); ++rep) write_trace_rows(os, traces[rep], rep);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json make_manifest(const ExperimentConfig& config, std::string_view command) {
  nlohmann::json manifest;
  manifest["format_version"] = kResultsFormatVersion;
  manifest["command"] = command;
  manifest["base_seed"] = config.base_seed;
  manifest["config"] = config.source;
  manifest["timestamp"] = utc_timestamp();
  return manifest;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

inline void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline std::string rate_dir_name(const Rational& v) {
  return "min_rate_" + std::to_string(v.num()) + "_" + std::to_string(v.den());
}

}  // namespace detail

// Creates the output directory and checks that it accepts files.
inline void prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError("output directory '" + dir.string() + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

// Writes summary.csv, replications.csv, manifest.json and (when enabled)
// trace.csv. A single run puts its trace in out_dir; a sweep puts one trace
// per fairness level in out_dir/min_rate_<p>_<q>/.
inline void write_results(const ExperimentConfig& config, std::span<const RunResult> results,
                          std::string_view command) {
  const auto& dir = config.out_dir;
  prepare_output_dir(dir);

  auto write = [&](const std::filesystem::path& path, auto&& body) {
    auto out = detail::open_output(path);
    body(out);
    detail::close_output(out, path);
  };
  write(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, results); });
  write(dir / "replications.csv", [&](std::ostream& os) { write_replications_csv(os, results); });
  if (config.write_traces) {
    const bool nested = results.size() > 1 || command == "sweep";
    for (const auto& r : results) {
      auto trace_dir = nested ? dir / detail::rate_dir_name(r.min_rate) : dir;
      prepare_output_dir(trace_dir);
      write(trace_dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, r.traces); });
    }
  }
  write(dir / "manifest.json",
        [&](std::ostream& os) { os << make_manifest(config, command).dump(2) << '\n'; });
}

}  // namespace fairalloc
