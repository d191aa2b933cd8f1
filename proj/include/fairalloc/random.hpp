#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace fairalloc {

// splitmix64 finalizer (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class StreamRole : std::uint64_t { kEnvironment = 1, kPolicy = 2 };

// Seed of one random stream: mix64(mix64(mix64(base) ^ rep) ^ role).
// Pure function of its inputs, so results never depend on scheduling.
constexpr std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t rep_index,
                                    StreamRole role) {
  std::uint64_t h = mix64(base_seed);
  h = mix64(h ^ rep_index);
  return mix64(h ^ static_cast<std::uint64_t>(role));
}

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the distributions below are written out
// by hand because the std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // P(true) = p exactly for p in {0, 1}.
  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [0, n) by rejection; n >= 1.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fairalloc
