#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairalloc/bandit.hpp"
#include "fairalloc/environment.hpp"
#include "fairalloc/errors.hpp"
#include "fairalloc/metrics.hpp"
#include "fairalloc/rational.hpp"

namespace fairalloc {

// Raised when a file cannot be read or written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Declarative description of one experiment (or one sweep of experiments).
//
// File format is JSON:
//
//   {
//     "policy": {"kind": "strict_rate_ucb", "min_rate": "1/2",
//                "exploration_coeff": 2.0, "epsilon": 0.1},
//     "env": {"kind": "co_tetris",
//             "teammates": [{"p0": 0.9}, {"p0": 0.3, "p_max": 0.6, "lambda": 0.01}],
//             "base_rate": 0.5, "support_boost": 0.3, "epoch_length": 5},
//     "horizon": 1000, "replications": 200, "base_seed": 42,
//     "sweep": ["0", "1/4", "1/2"], "out_dir": "results",
//     "write_traces": false, "threads": 0,
//     "disparity_threshold": 0.2, "disparity_start": 2
//   }
struct ExperimentConfig {
  PolicyConfig policy;
  EnvConfig env;
  std::uint64_t replications = 1;
  std::uint64_t base_seed = 0;
  std::vector<Rational> sweep;
  std::filesystem::path out_dir = "results";
  bool write_traces = false;
  // Worker threads for replications; 0 picks the hardware concurrency.
  unsigned threads = 0;
  double disparity_threshold = kDefaultDisparityThreshold;
  std::uint64_t disparity_start = kDefaultDisparityStart;

  // The document this config was parsed from, echoed into the manifest.
  nlohmann::json source;

  std::uint64_t horizon() const { return env.horizon; }
  std::size_t arm_count() const { return env.arm_count(); }
};

namespace detail {

using nlohmann::json;

inline std::string join_key(std::string_view parent, std::string_view key) {
  return parent.empty() ? std::string(key) : std::string(parent) + "." + std::string(key);
}

inline void reject_unknown_keys(const json& object, std::string_view where,
                                std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) throw ConfigError(join_key(where, key) + ": unknown key");
  }
}

inline const json* find(const json& object, std::string_view key) {
  auto it = object.find(key);
  return it == object.end() ? nullptr : &*it;
}

inline double get_number(const json& value, const std::string& key) {
  if (!value.is_number()) throw ConfigError(key + ": expected a number, got " + value.dump());
  const double x = value.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key + ": expected a finite number");
  return x;
}

inline std::uint64_t get_unsigned(const json& value, const std::string& key) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer()) {
    if (value.get<std::int64_t>() >= 0) return value.get<std::uint64_t>();
    throw ConfigError(key + ": expected a non-negative integer, got " + value.dump());
  }
  throw ConfigError(key + ": expected an integer, got " + value.dump());
}

inline bool get_bool(const json& value, const std::string& key) {
  if (!value.is_boolean()) throw ConfigError(key + ": expected true or false, got " + value.dump());
  return value.get<bool>();
}

inline std::string get_string(const json& value, const std::string& key) {
  if (!value.is_string()) throw ConfigError(key + ": expected a string, got " + value.dump());
  return value.get<std::string>();
}

inline Rational get_rational(const json& value, const std::string& key) {
  Rational r;
  if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
    r = Rational(value.get<std::uint64_t>(), 1);
  } else if (value.is_string()) {
    try {
      r = Rational::parse(value.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  } else {
    throw ConfigError(key + ": expected a rational string \"p/q\", got " + value.dump());
  }
  if (r.num() > r.den()) throw ConfigError(key + ": " + r.to_string() + " exceeds 1");
  return r;
}

inline const json& require(const json& object, std::string_view where, std::string_view key) {
  const json* value = find(object, key);
  if (value == nullptr) throw ConfigError(join_key(where, key) + ": missing required key");
  return *value;
}

inline void require_object(const json& value, const std::string& key) {
  if (!value.is_object()) throw ConfigError(key + ": expected an object, got " + value.dump());
}

inline PolicyConfig parse_policy(const json& doc) {
  require_object(doc, "policy");
  reject_unknown_keys(doc, "policy", {"kind", "min_rate", "exploration_coeff", "epsilon"});
  PolicyConfig policy;
  policy.kind = [&] {
    try {
      return parse_policy_kind(get_string(require(doc, "policy", "kind"), "policy.kind"));
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      throw ConfigError(msg.rfind("policy.", 0) == 0 ? msg : "policy.kind: " + msg);
    }
  }();
  if (const json* v = find(doc, "min_rate")) policy.fairness.min_rate = get_rational(*v, "policy.min_rate");
  if (const json* v = find(doc, "exploration_coeff")) {
    policy.fairness.exploration_coeff = get_number(*v, "policy.exploration_coeff");
    if (policy.fairness.exploration_coeff <= 0.0) {
      throw ConfigError("policy.exploration_coeff: must be positive");
    }
  }
  if (const json* v = find(doc, "epsilon")) {
    policy.epsilon = get_number(*v, "policy.epsilon");
    if (policy.epsilon < 0.0 || policy.epsilon > 1.0) {
      throw ConfigError("policy.epsilon: must lie in [0, 1]");
    }
  }
  return policy;
}

inline TeammateModel parse_teammate(const json& doc, const std::string& where) {
  require_object(doc, where);
  reject_unknown_keys(doc, where, {"p0", "p_max", "lambda"});
  TeammateModel t;
  t.base_skill = get_number(require(doc, where, "p0"), where + ".p0");
  t.max_skill = t.base_skill;
  if (const json* v = find(doc, "p_max")) t.max_skill = get_number(*v, where + ".p_max");
  if (const json* v = find(doc, "lambda")) t.learning_rate = get_number(*v, where + ".lambda");
  return t;
}

inline EnvConfig parse_env(const json& doc) {
  require_object(doc, "env");
  reject_unknown_keys(doc, "env",
                      {"kind", "teammates", "base_rate", "support_boost", "epoch_length"});
  EnvConfig env;
  try {
    env.kind = parse_env_kind(get_string(require(doc, "env", "kind"), "env.kind"));
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.rfind("env.", 0) == 0 ? msg : "env.kind: " + msg);
  }
  if (const json* v = find(doc, "teammates")) {
    if (!v->is_array()) throw ConfigError("env.teammates: expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      env.teammates.push_back(parse_teammate((*v)[i], "env.teammates[" + std::to_string(i) + "]"));
    }
  }
  if (const json* v = find(doc, "base_rate")) {
    if (v->is_array()) {
      env.base_rate.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        env.base_rate.push_back(get_number((*v)[i], "env.base_rate[" + std::to_string(i) + "]"));
      }
    } else {
      const double rate = get_number(*v, "env.base_rate");
      env.base_rate = {rate, rate};
    }
  }
  if (const json* v = find(doc, "support_boost")) {
    env.support_boost = get_number(*v, "env.support_boost");
  }
  if (const json* v = find(doc, "epoch_length")) {
    env.epoch_length = get_unsigned(*v, "env.epoch_length");
  }
  return env;
}

}  // namespace detail

// Checks feasibility of the configured min_rate and every sweep value.
// Throws InfeasibleError naming the offending key and value.
inline void check_feasibility(const ExperimentConfig& config) {
  const std::size_t k = config.arm_count();
  if (!config.policy.fairness.min_rate.scaled_at_most_one(k)) {
    throw InfeasibleError("policy.min_rate: " + config.policy.fairness.min_rate.to_string() +
                          " is infeasible for " + std::to_string(k) +
                          " arms (k * min_rate > 1)");
  }
  for (const auto& v : config.sweep) {
    if (!v.scaled_at_most_one(k)) {
      throw InfeasibleError("sweep: min_rate " + v.to_string() + " is infeasible for " +
                            std::to_string(k) + " arms (k * min_rate > 1)");
    }
  }
}

// Builds and validates a config from a parsed document. Type and range
// problems raise ConfigError; an infeasible fairness level raises
// InfeasibleError.
inline ExperimentConfig parse_config(const nlohmann::json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(doc, "",
                      {"policy", "env", "horizon", "replications", "base_seed", "sweep",
                       "out_dir", "write_traces", "threads", "disparity_threshold",
                       "disparity_start"});
  ExperimentConfig config;
  config.source = doc;
  config.policy = parse_policy(require(doc, "", "policy"));
  config.env = parse_env(require(doc, "", "env"));
  config.env.horizon = get_unsigned(require(doc, "", "horizon"), "horizon");
  if (config.env.horizon == 0) throw ConfigError("horizon: must be at least 1");
  if (const json* v = find(doc, "replications")) {
    config.replications = get_unsigned(*v, "replications");
    if (config.replications == 0) throw ConfigError("replications: must be at least 1");
  }
  if (const json* v = find(doc, "base_seed")) config.base_seed = get_unsigned(*v, "base_seed");
  if (const json* v = find(doc, "sweep")) {
    if (!v->is_array()) throw ConfigError("sweep: expected an array of rationals");
    for (std::size_t i = 0; i < v->size(); ++i) {
      config.sweep.push_back(get_rational((*v)[i], "sweep[" + std::to_string(i) + "]"));
    }
  }
  if (const json* v = find(doc, "out_dir")) config.out_dir = get_string(*v, "out_dir");
  if (const json* v = find(doc, "write_traces")) config.write_traces = get_bool(*v, "write_traces");
  if (const json* v = find(doc, "threads")) {
    config.threads = static_cast<unsigned>(get_unsigned(*v, "threads"));
  }
  if (const json* v = find(doc, "disparity_threshold")) {
    config.disparity_threshold = get_number(*v, "disparity_threshold");
    if (config.disparity_threshold <= 0.0 || config.disparity_threshold > 1.0) {
      throw ConfigError("disparity_threshold: must lie in (0, 1]");
    }
  }
  if (const json* v = find(doc, "disparity_start")) {
    config.disparity_start = get_unsigned(*v, "disparity_start");
  }

  try {
    validate(config.env);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("env.") + e.what());
  }
  check_feasibility(config);
  return config;
}

inline nlohmann::json load_config_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
}

// Applies one dotted-key override such as "policy.min_rate=1/3" or
// "env.teammates.0.p0=0.8". The value is read as JSON when it parses as JSON
// and as a plain string otherwise, so it is type-checked exactly like a value
// from the file once the document is parsed.
inline void apply_override(nlohmann::json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "': expected key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));

  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }

  nlohmann::json* node = &doc;
  std::string_view rest = key;
  while (true) {
    const auto dot = rest.find('.');
    const std::string segment(rest.substr(0, dot));
    if (segment.empty()) throw ConfigError("override '" + key + "': empty key segment");
    const bool last = dot == std::string_view::npos;
    if (node->is_array()) {
      std::size_t index = 0;
      auto [ptr, ec] = std::from_chars(segment.data(), segment.data() + segment.size(), index);
      if (ec != std::errc{} || ptr != segment.data() + segment.size() || index >= node->size()) {
        throw ConfigError("override '" + key + "': '" + segment + "' is not a valid index");
      }
      node = &(*node)[index];
    } else {
      if (node->is_null()) *node = nlohmann::json::object();
      if (!node->is_object()) {
        throw ConfigError("override '" + key + "': cannot descend into a non-object value");
      }
      node = &(*node)[segment];
    }
    if (last) break;
    rest = rest.substr(dot + 1);
  }
  *node = std::move(value);
}

inline ExperimentConfig load_config(const std::filesystem::path& path,
                                    const std::vector<std::string>& overrides = {}) {
  auto doc = load_config_document(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

}  // namespace fairalloc
