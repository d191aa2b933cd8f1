#pragma once

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairalloc/config.hpp"
#include "fairalloc/errors.hpp"
#include "fairalloc/harness.hpp"

namespace fairalloc {

enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitInvalidConfig = 2,
  kExitInfeasible = 3,
};

namespace detail {

struct CliOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t rep = 0;
  bool quiet = false;
};

inline int cmd_validate(const ExperimentConfig& config, const CliOptions& opts, std::ostream& out) {
  if (!opts.quiet) {
    out << "valid: " << to_string(config.env.kind) << " with " << config.arm_count()
        << " arms, policy " << to_string(config.policy.kind) << ", min_rate "
        << config.policy.fairness.min_rate << ", horizon " << config.horizon() << ", "
        << config.replications << " replications\n";
  }
  return kExitOk;
}

inline int cmd_run(const ExperimentConfig& config, const CliOptions& opts, std::ostream& out) {
  prepare_output_dir(config.out_dir);
  const RunResult result = run_experiment(config);
  write_results(config, std::span<const RunResult>(&result, 1), "run");
  if (!opts.quiet) {
    out << "run: " << config.replications << " replications of " << to_string(result.policy)
        << " (min_rate " << result.min_rate << "), mean total reward "
        << format_number(result.summary.total_reward.mean) << " -> "
        << (config.out_dir / "summary.csv").string() << '\n';
  }
  return kExitOk;
}

inline int cmd_sweep(const ExperimentConfig& config, const CliOptions& opts, std::ostream& out) {
  if (config.sweep.empty()) throw ConfigError("sweep: expected a non-empty list of min_rate values");
  prepare_output_dir(config.out_dir);
  const auto results = sweep(config);
  write_results(config, results, "sweep");
  if (!opts.quiet) {
    out << "sweep: " << results.size() << " fairness levels x " << config.replications
        << " replications of " << to_string(config.policy.kind) << " -> "
        << (config.out_dir / "summary.csv").string() << '\n';
  }
  return kExitOk;
}

inline int cmd_trace(const ExperimentConfig& config, const CliOptions& opts, std::ostream& out) {
  if (opts.rep >= config.replications) {
    throw ConfigError("--rep: replication " + std::to_string(opts.rep) + " does not exist (" +
                      std::to_string(config.replications) + " replications)");
  }
  const ReplicationResult r = run_replication(config, opts.rep);
  out << "t,arm,reason,reward,cum_reward\n";
  write_trace_rows(out, r.trace, std::nullopt);
  return kExitOk;
}

}  // namespace detail

// Entry point shared by the executable and the tests. Results go to `out`,
// diagnostics to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fairness-constrained resource allocation experiments", "fairalloc"};
  app.require_subcommand(1);
  detail::CliOptions opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "Experiment config (JSON)")->required();
    sub->add_option("--set", opts.overrides, "Override a config value, e.g. policy.min_rate=1/3")
        ->allow_extra_args(false);
    sub->add_flag("--quiet", opts.quiet, "Suppress the summary line");
  };
  auto* run = app.add_subcommand("run", "Run all replications and write results");
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one experiment per min_rate in `sweep`");
  auto* trace = app.add_subcommand("trace", "Replay one replication and print its decisions");
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  for (auto* sub : {run, sweep_cmd, trace, validate}) add_common(sub);
  trace->add_option("--rep", opts.rep, "Replication index")->default_val(0);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalidConfig;
  }

  try {
    const ExperimentConfig config = load_config(opts.config_path, opts.overrides);
    if (validate->parsed()) return detail::cmd_validate(config, opts, out);
    if (run->parsed()) return detail::cmd_run(config, opts, out);
    if (sweep_cmd->parsed()) return detail::cmd_sweep(config, opts, out);
    return detail::cmd_trace(config, opts, out);
  } catch (const InfeasibleError& e) {
    err << "error: infeasible fairness constraint: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ConfigError& e) {
    err << "error: invalid config: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace fairalloc
