#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dimlab/percolation.hpp"

using namespace dimlab;

TEST(Simulate, ForcedKeepAndExtinction)
{
    const auto full = simulate(0.5, 10, 1, {1.0});
    for (int k = 0; k <= 10; ++k) EXPECT_EQ(full.level(k).size(), std::size_t{1} << k);
    const auto z = survivor_counts(full);
    for (int k = 1; k <= 10; ++k) EXPECT_EQ(z[k - 1], std::uint64_t{1} << k);

    const auto dead = simulate(0.5, 10, 1, {0.0});
    EXPECT_FALSE(dead.survived());
    for (auto c : survivor_counts(dead)) EXPECT_EQ(c, 0u);
    EXPECT_TRUE(window_event(dead, 0.2).pass());
}

TEST(Simulate, DeterministicAndParentClosed)
{
    const auto a = simulate(0.4, 16, 77);
    const auto b = simulate(0.4, 16, 77);
    for (int k = 0; k <= 16; ++k) {
        ASSERT_EQ(a.level(k), b.level(k));
        for (auto i : a.level(k))
            if (k > 0) EXPECT_TRUE(std::binary_search(a.level(k - 1).begin(), a.level(k - 1).end(), i >> 1));
        EXPECT_LE(a.level(k).size(), std::size_t{1} << k);
    }
    EXPECT_THROW(simulate(0.4, 25, 1), ResourceError);
    EXPECT_THROW(simulate(1.0, 5, 1), InvalidArgument);
    EXPECT_THROW(PercolationSample(0.5, 1, 0, 1.0, {{0}, {5}}), InvalidArgument);
    EXPECT_THROW(PercolationSample(0.5, 2, 0, 1.0, {{0}, {0}, {3}}), InvalidArgument);
}

TEST(Simulate, FirstGenerationKeepRate)
{
    const double gamma = 0.5;
    const double p = std::exp2(-gamma);
    const int seeds = 10'000;
    std::uint64_t kept = 0;
    for (int s = 0; s < seeds; ++s) kept += simulate(gamma, 1, member_seed(5, static_cast<std::uint64_t>(s))).level(1).size();
    const double rate = static_cast<double>(kept) / (2.0 * seeds);
    EXPECT_NEAR(rate, p, 5 * std::sqrt(p * (1 - p) / (2.0 * seeds)));
}

TEST(Simulate, MeanGenerationSizeGrowsGeometrically)
{
    const double gamma = 0.5;
    const int seeds = 4000;
    std::vector<double> sum(8, 0.0);
    std::vector<double> sum2(8, 0.0);
    for (int s = 0; s < seeds; ++s) {
        const auto z = survivor_counts(simulate(gamma, 8, member_seed(6, static_cast<std::uint64_t>(s))));
        for (int k = 0; k < 8; ++k) {
            sum[k] += static_cast<double>(z[k]);
            sum2[k] += static_cast<double>(z[k]) * static_cast<double>(z[k]);
        }
    }
    for (int k = 0; k < 8; ++k) {
        const double mean = sum[k] / seeds;
        const double se = std::sqrt((sum2[k] / seeds - mean * mean) / seeds);
        EXPECT_NEAR(mean, std::exp2((1 - gamma) * (k + 1)), 5 * se) << "generation " << k + 1;
    }
}

TEST(WindowEvent, ForcedKeepFailsForLargeN)
{
    const auto full = simulate(0.5, 20, 1, {1.0});
    const auto rep = window_event(full, 0.2);
    EXPECT_FALSE(rep.pass());
    // 2^{n-m} <= n^2 2^{(n-m)/2} iff (n-m)/2 <= 2 log2 n: the first failure is the first n
    // with some admissible m = 0 window breaking it.
    for (const auto& row : rep.rows) {
        const int n = row.n;
        const bool fails = n > 4 * std::log2(static_cast<double>(n));
        EXPECT_EQ(row.pass, !fails) << "n=" << n;
    }
}

TEST(WindowEvent, CsvLayout)
{
    std::ostringstream os;
    window_event(simulate(0.5, 2, 1, {1.0}), 0.5).write_csv(os);
    EXPECT_EQ(os.str(), "n,max_q,count,threshold,pass\n1,0,2,1.41421,0\n2,0,4,8,1\n");
}

TEST(Extinction, FixedPoint)
{
    const double p = std::exp2(-0.5);
    EXPECT_NEAR(extinction_probability(0.5), std::pow((1 - p) / p, 2), 1e-10);
    EXPECT_NEAR(extinction_probability(0.5), 0.17157, 1e-5);
    EXPECT_EQ(extinction_probability_for_keep(1.0), 0.0);
    EXPECT_EQ(extinction_probability_for_keep(0.5), 1.0);
    for (double g : {0.01, 0.3, 0.7, 0.99}) {
        const double e = extinction_probability(g);
        const double q = std::exp2(-g);
        EXPECT_LT(e, 1.0);
        EXPECT_NEAR(e, std::pow(1 - q + q * e, 2), 1e-10);
    }
}

TEST(Extinction, MatchesSimulatedFrequency)
{
    const int seeds = 5000;
    int dead = 0;
    for (int s = 0; s < seeds; ++s)
        if (!simulate(0.5, 20, member_seed(9, static_cast<std::uint64_t>(s))).survived()) ++dead;
    const double e = extinction_probability(0.5);
    EXPECT_NEAR(static_cast<double>(dead) / seeds, e, 5 * std::sqrt(e * (1 - e) / seeds));
}

TEST(TailCheck, Examples)
{
    const auto t = tail_check(0.5, 12, {1, 2, 3, 4}, 2000, 33);
    EXPECT_TRUE(t.strictly_decreasing);
    EXPECT_GT(t.decay_rate, 0.0);
    // k 2^{n/2} > 2^n: frequency zero.
    const auto big = tail_check(0.5, 12, {65}, 1000, 1);
    EXPECT_EQ(big.rows[0].hits, 0u);
    // k -> 0+: survival probability to depth n.
    const auto tiny = tail_check(0.5, 12, {1e-9}, 4000, 2);
    const double e = extinction_probability(0.5);
    EXPECT_NEAR(tiny.rows[0].frequency, 1 - e, 5 * std::sqrt(e * (1 - e) / 4000) + 0.01);
    EXPECT_THROW(tail_check(0.5, 12, {1}, 999, 1), InvalidArgument);
}

TEST(Sample, HexLevels)
{
    const auto s = simulate(0.5, 3, 1, {1.0});
    std::ostringstream os;
    s.write_levels(os);
    EXPECT_EQ(os.str(), "0 8\n1 c\n2 f\n3 ff\n");
    EXPECT_EQ(PercolationSample(0.5, 2, 0, 1.0, {{0}, {1}, {2}}).hex_level(2), "2");
}
