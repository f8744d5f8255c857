#include <gtest/gtest.h>

#include <cmath>

#include "dimlab/rng.hpp"

using namespace dimlab;

TEST(Philox, KnownAnswerVectors)
{
    // Reference outputs of Philox4x32-10 from the Random123 distribution.
    EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Uniform, StrictlyInsideUnitInterval)
{
    EXPECT_GT(to_open_unit(0), 0.0);
    EXPECT_LT(to_open_unit(~std::uint64_t{0}), 1.0);
    EXPECT_EQ(to_open_unit(std::uint64_t{1} << 63), 0.5 + 0x1.0p-53);
    EXPECT_EQ(to_open_unit(~std::uint64_t{0}), 1.0 - 0x1.0p-53);
}

TEST(Normal, QuantileValues)
{
    EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_quantile(0.025), -1.959963984540054, 1e-12);
    EXPECT_TRUE(std::isfinite(normal_quantile(to_open_unit(0))));
}

TEST(RandomStream, DeterministicAndSplittable)
{
    RandomStream a(42);
    RandomStream b(42);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
    // Starting at block 5 skips ten words.
    RandomStream c(42);
    for (int i = 0; i < 10; ++i) c();
    RandomStream d(42, 5);
    for (int i = 0; i < 20; ++i) ASSERT_EQ(c(), d());
    EXPECT_NE(RandomStream(member_seed(42, 1))(), RandomStream(member_seed(42, 2))());
    EXPECT_EQ(member_seed(42, 0), 42u);
}

TEST(RandomStream, MomentsOfUniformAndNormal)
{
    RandomStream rng(7);
    const int n = 200'000;
    double su = 0.0;
    double sz = 0.0;
    double szz = 0.0;
    for (int i = 0; i < n; ++i) {
        su += rng.uniform();
        const double z = rng.normal();
        sz += z;
        szz += z * z;
    }
    EXPECT_NEAR(su / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
    EXPECT_NEAR(sz / n, 0.0, 5 / std::sqrt(n));
    EXPECT_NEAR(szz / n, 1.0, 5 * std::sqrt(2.0 / n));
}

TEST(KeyedUniform, RandomAccessAndKeyDependence)
{
    EXPECT_EQ(keyed_uniform(9, 3, 4), keyed_uniform(9, 3, 4));
    EXPECT_NE(keyed_uniform(9, 3, 4), keyed_uniform(9, 4, 3));
    EXPECT_NE(keyed_uniform(9, 3, 4), keyed_uniform(10, 3, 4));
    double s = 0.0;
    for (std::uint64_t i = 0; i < 100'000; ++i) s += keyed_uniform(1, i, 17);
    EXPECT_NEAR(s / 1e5, 0.5, 5 * std::sqrt(1.0 / 12 / 1e5));
}
