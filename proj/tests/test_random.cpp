#include <gtest/gtest.h>

#include <set>

#include "qpcp/random.hpp"

namespace qpcp {
namespace {

TEST(Seed, HexRoundTrip) {
  const Seed128 s = parse_seed("0x0123456789abcdef0011223344556677");
  EXPECT_EQ(s.hi, 0x0123456789abcdefULL);
  EXPECT_EQ(s.lo, 0x0011223344556677ULL);
  EXPECT_EQ(to_hex(s), "0123456789abcdef0011223344556677");
  EXPECT_EQ(parse_seed("ff"), (Seed128{0, 255}));
  EXPECT_THROW(parse_seed(""), std::invalid_argument);
  EXPECT_THROW(parse_seed("xyz"), std::invalid_argument);
  EXPECT_THROW(parse_seed(std::string(33, '1')), std::invalid_argument);
}

TEST(CounterRng, ReproducibleAndSeedSensitive) {
  CounterRng a(Seed128{1, 2}), b(Seed128{1, 2}), c(Seed128{1, 3});
  for (int k = 0; k < 100; ++k) {
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
  }
  EXPECT_EQ(a.counter(), 100U);
}

TEST(DeriveSeed, StreamsAreDistinct) {
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const Seed128 s = derive_seed(Seed128{0, 7}, k);
    seen.insert({s.hi, s.lo});
  }
  EXPECT_EQ(seen.size(), 1000U);
}

TEST(CoinSource, CountsEveryBit) {
  CoinSource coins(Seed128{0, 1});
  coins.bits(97);
  coins.bits(3);
  coins.bits(128);
  EXPECT_EQ(coins.consumed(), 228U);
  EXPECT_LE(coins.bits(5), 31U);
}

TEST(CoinSource, BitStreamIsSplitInvariant) {
  CoinSource whole(Seed128{9, 9}), parts(Seed128{9, 9});
  const u128 w = whole.bits(100);
  u128 p = parts.bits(37);
  p = (p << 63) | parts.bits(63);
  EXPECT_TRUE(w == p);
}

TEST(CoinSource, UniformBelowIsRoughlyUniform) {
  CoinSource coins(Seed128{0, 2});
  std::vector<int> counts(6, 0);
  for (int k = 0; k < 60000; ++k) ++counts[coins.uniform_below(6)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
  EXPECT_EQ(coins.uniform_below(1), 0U);
}

TEST(CeilLog2, SmallValues) {
  EXPECT_EQ(ceil_log2(1), 0U);
  EXPECT_EQ(ceil_log2(2), 1U);
  EXPECT_EQ(ceil_log2(3), 2U);
  EXPECT_EQ(ceil_log2(1024), 10U);
  EXPECT_EQ(ceil_log2(1025), 11U);
}

}  // namespace
}  // namespace qpcp
