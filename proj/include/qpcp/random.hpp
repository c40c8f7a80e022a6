#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace qpcp {

using u128 = unsigned __int128;
using i128 = __int128;

/// 128-bit seed. Every randomized routine in the library is a pure function
/// of one of these.
struct Seed128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend bool operator==(const Seed128&, const Seed128&) = default;
};

/// Accepts up to 32 hex digits with an optional "0x" prefix.
Seed128 parse_seed(std::string_view hex);
std::string to_hex(const Seed128& seed);

/// Independent child stream `stream` of `base`.
Seed128 derive_seed(const Seed128& base, std::uint64_t stream);

std::uint64_t mix64(std::uint64_t z);

/// Counter-based generator: word k is a keyed hash of (seed, k), so any
/// position of the stream is reproducible without replaying the prefix.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(Seed128 seed) : seed_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  std::uint64_t counter() const { return counter_; }

 private:
  Seed128 seed_;
  std::uint64_t counter_ = 0;
};

/// Exact coin source: hands out bit strings of arbitrary width (≤ 128) and
/// counts every bit it hands out.
class CoinSource {
 public:
  explicit CoinSource(Seed128 seed) : rng_(seed) {}

  /// Next `count` bits, most significant first.
  u128 bits(unsigned count);

  /// Uniform in [0, bound) by rejection on ⌈log2 bound⌉-bit draws.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Uniform double in [0, 1) from 53 fresh bits.
  double uniform01();

  Seed128 next_seed();

  std::uint64_t consumed() const { return consumed_; }

 private:
  CounterRng rng_;
  std::uint64_t reservoir_ = 0;
  unsigned available_ = 0;
  std::uint64_t consumed_ = 0;
};

/// ⌈log2 v⌉ for v ≥ 1.
unsigned ceil_log2(std::uint64_t v);

}  // namespace qpcp
