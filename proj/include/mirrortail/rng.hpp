#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>

namespace mirrortail {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Order-sensitive combination of stream identifiers into a single key.
inline constexpr std::uint64_t stream_key(std::initializer_list<std::uint64_t> ids) noexcept {
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (auto id : ids) h = splitmix64(h ^ splitmix64(id));
  return h;
}

// Counter-based generator: the n-th output depends only on (key, n), so a
// stream identified by e.g. (seed, run, step) can be regenerated anywhere
// without sharing state. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
  CounterRng(std::initializer_list<std::uint64_t> ids) noexcept : key_(stream_key(ids)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * (++counter_));
  }

  // Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // +1 or -1 with equal probability.
  double sign() noexcept { return ((*this)() >> 63) != 0 ? 1.0 : -1.0; }

  // Standard normal via Box-Muller (one value per call, no caching so the
  // stream stays a pure function of the counter).
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Exp(1).
  double exponential() noexcept { return -std::log(uniform()); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mirrortail
