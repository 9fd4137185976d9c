#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "msvi/random.hpp"

using msvi::RandomStream;

TEST(Philox, KnownAnswers) {
  using msvi::detail::philox4x32_10;
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                          {0xffffffff, 0xffffffff}),
            (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                          {0xa4093822, 0x299f31d0}),
            (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, SameSeedAndStreamRepeatForAMillionDraws) {
  RandomStream a(42, 7);
  RandomStream b(42, 7);
  for (int i = 0; i < 1'000'000; ++i) ASSERT_EQ(a(), b());
}

TEST(RandomStream, DistinctStreamsDiffer) {
  RandomStream a(42, 0);
  RandomStream b(42, 1);
  RandomStream c(43, 0);
  int same_ab = 0;
  int same_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    same_ab += x == b();
    same_ac += x == c();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(RandomStream, DerivedPathsAreDistinctAndStable) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 50; ++i) {
    for (std::uint64_t j = 0; j < 50; ++j) {
      auto s = RandomStream::derive(9, {i, j});
      firsts.insert(s());
    }
  }
  EXPECT_EQ(firsts.size(), 2500u);
  auto x = RandomStream::derive(9, {3, 4});
  auto y = RandomStream::derive(9, {3, 4});
  EXPECT_EQ(x(), y());
  auto z = RandomStream::derive(9, {4, 3});
  auto w = RandomStream::derive(9, {3, 4});
  EXPECT_NE(z(), w());
}

TEST(RandomStream, UniformMomentsAndRange) {
  RandomStream rng(1, 0);
  const int n = 200000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum_sq / n - 0.25, 1.0 / 12.0, 2e-3);
}

TEST(RandomStream, NormalAndExponentialMoments) {
  RandomStream rng(2, 0);
  const int n = 200000;
  double s1 = 0.0;
  double s2 = 0.0;
  double e1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s1 += x;
    s2 += x * x;
    const double e = rng.exponential();
    ASSERT_GT(e, 0.0);
    e1 += e;
  }
  EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(e1 / n, 1.0, 4.0 / std::sqrt(n));
}

TEST(RandomStream, BelowIsUniformOnSmallRange) {
  RandomStream rng(3, 0);
  std::array<int, 7> counts{};
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.below(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 4.0 * std::sqrt(n / 7.0));
}
