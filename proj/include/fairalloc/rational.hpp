#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "fairalloc/errors.hpp"

namespace fairalloc {

// Non-negative exact rational p/q, always stored in lowest terms with q >= 1.
// Used for the minimum selection rate so that quota floors are exact.
class Rational {
 public:
  constexpr Rational() = default;

  Rational(std::uint64_t num, std::uint64_t den) : num_(num), den_(den) {
    if (den == 0) throw ConfigError("rational denominator must be positive");
    const std::uint64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  // Accepts "p/q" or a bare integer "p".
  static Rational parse(std::string_view text) {
    auto read = [&](std::string_view part) {
      std::uint64_t value = 0;
      const char* first = part.data();
      const char* last = part.data() + part.size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (part.empty() || ec != std::errc{} || ptr != last) {
        throw ConfigError("invalid rational '" + std::string(text) +
                          "': expected \"p/q\" with non-negative integers");
      }
      return value;
    };
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) return Rational(read(text), 1);
    const std::uint64_t den = read(text.substr(slash + 1));
    if (den == 0) {
      throw ConfigError("invalid rational '" + std::string(text) +
                        "': denominator must be positive");
    }
    return Rational(read(text.substr(0, slash)), den);
  }

  constexpr std::uint64_t num() const { return num_; }
  constexpr std::uint64_t den() const { return den_; }
  constexpr bool is_zero() const { return num_ == 0; }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  // floor(p * n / q) without overflow or rounding.
  std::uint64_t floor_times(std::uint64_t n) const {
    const unsigned __int128 prod = static_cast<unsigned __int128>(num_) * n;
    return static_cast<std::uint64_t>(prod / den_);
  }

  // k * (p/q) <= 1
  bool scaled_at_most_one(std::uint64_t k) const {
    return static_cast<unsigned __int128>(num_) * k <= den_;
  }

  std::string to_string() const {
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend bool operator==(const Rational&, const Rational&) = default;

  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const unsigned __int128 lhs = static_cast<unsigned __int128>(a.num_) * b.den_;
    const unsigned __int128 rhs = static_cast<unsigned __int128>(b.num_) * a.den_;
    return lhs <=> rhs;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.to_string();
  }

 private:
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
};

}  // namespace fairalloc
