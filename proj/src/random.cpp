#include "qpcp/random.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace qpcp {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Seed128 parse_seed(std::string_view hex) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.empty() || hex.size() > 32)
    throw std::invalid_argument("seed must have 1 to 32 hex digits");
  u128 value = 0;
  for (char c : hex) {
    const int d = hex_value(c);
    if (d < 0) throw std::invalid_argument("seed contains a non-hex character");
    value = (value << 4) | static_cast<unsigned>(d);
  }
  return {static_cast<std::uint64_t>(value >> 64), static_cast<std::uint64_t>(value)};
}

std::string to_hex(const Seed128& seed) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(32, '0');
  u128 value = (static_cast<u128>(seed.hi) << 64) | seed.lo;
  for (int i = 31; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[static_cast<unsigned>(value & 0xF)];
    value >>= 4;
  }
  return out;
}

Seed128 derive_seed(const Seed128& base, std::uint64_t stream) {
  const std::uint64_t s = mix64(stream * kGolden + 0x632BE59BD9B4E019ULL);
  return {mix64(base.hi ^ s), mix64(base.lo + mix64(s ^ 0xD1B54A32D192ED03ULL))};
}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return mix64(seed_.hi ^ mix64(seed_.lo + kGolden * counter_));
}

u128 CoinSource::bits(unsigned count) {
  if (count > 128) throw std::invalid_argument("at most 128 bits per draw");
  u128 out = 0;
  unsigned got = 0;
  while (got < count) {
    if (available_ == 0) {
      reservoir_ = rng_();
      available_ = 64;
    }
    const unsigned take = std::min(count - got, available_);
    const std::uint64_t chunk =
        take == 64 ? reservoir_ : (reservoir_ >> (available_ - take)) & ((std::uint64_t{1} << take) - 1);
    out = (out << take) | chunk;
    available_ -= take;
    if (available_ < 64) reservoir_ &= available_ == 0 ? 0 : ((std::uint64_t{1} << available_) - 1);
    got += take;
  }
  consumed_ += count;
  return out;
}

std::uint64_t CoinSource::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below needs a positive bound");
  if (bound == 1) return 0;
  const unsigned width = ceil_log2(bound);
  for (;;) {
    const auto v = static_cast<std::uint64_t>(bits(width));
    if (v < bound) return v;
  }
}

double CoinSource::uniform01() {
  return static_cast<double>(static_cast<std::uint64_t>(bits(53))) * 0x1.0p-53;
}

Seed128 CoinSource::next_seed() {
  const u128 v = bits(128);
  return {static_cast<std::uint64_t>(v >> 64), static_cast<std::uint64_t>(v)};
}

unsigned ceil_log2(std::uint64_t v) {
  if (v <= 1) return 0;
  return static_cast<unsigned>(std::bit_width(v - 1));
}

}  // namespace qpcp
