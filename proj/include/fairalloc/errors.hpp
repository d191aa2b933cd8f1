#pragma once

#include <stdexcept>
#include <string>

namespace fairalloc {

// Malformed or out-of-range configuration (parse errors, bad types, invalid
// probabilities, zero horizon, ...).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// The fairness constraint cannot be satisfied: k * min_rate > 1.
class InfeasibleError : public ConfigError {
 public:
  explicit InfeasibleError(const std::string& what) : ConfigError(what) {}
};

// Contract violations at run time (stepping a finished episode, bad arm
// index, reward outside [0, 1], ...).
class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace fairalloc
