#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "dimlab/estimators.hpp"
#include "dimlab/selfsimilar.hpp"

using namespace dimlab;

namespace {

Ifs cantor() { return Ifs({{1.0 / 3, 0.0}, {1.0 / 3, 2.0 / 3}}); }

// Order-n cells holding a depth-`depth` orbit point of the Cantor maps (closed cells).
std::set<std::uint64_t> sampled_cells(int n, int depth)
{
    std::set<std::uint64_t> cells;
    const double scale = std::ldexp(1.0, n);
    for (std::uint64_t word = 0; word < (std::uint64_t{1} << depth); ++word) {
        double x = 0.0;
        double w = 1.0;
        for (int i = 0; i < depth; ++i) {
            w /= 3.0;
            if ((word >> i) & 1u) x += 2.0 * w;
        }
        for (double y : {x, x + w}) {
            const double s = y * scale;
            const auto p = static_cast<std::uint64_t>(std::floor(s));
            if (p < (std::uint64_t{1} << n)) cells.insert(p);
            if (s == std::floor(s) && p > 0) cells.insert(p - 1);
        }
    }
    return cells;
}

} // namespace

TEST(SimilarityDimension, Examples)
{
    EXPECT_NEAR(similarity_dimension(cantor()).raw, std::log(2.0) / std::log(3.0), 1e-11);
    EXPECT_NEAR(similarity_dimension(cantor()).raw, 0.630930, 1e-6);
    EXPECT_EQ(similarity_dimension(Ifs({{0.5, 0.0}})).raw, 0.0);
    EXPECT_NEAR(similarity_dimension(Ifs({{0.5, 0.0}, {0.5, 0.5}})).raw, 1.0, 1e-11);
    EXPECT_THROW(Ifs({{1.0, 0.0}}), InvalidArgument);
    EXPECT_THROW(Ifs({{0.5, 0.7}}), InvalidArgument);
}

TEST(SimilarityDimension, SolvesMoranEquation)
{
    const Ifs ifs({{0.5, 0.0}, {-0.25, 0.75}, {0.2, 0.8}});
    const double s = similarity_dimension(ifs).raw;
    EXPECT_NEAR(std::pow(0.5, s) + std::pow(0.25, s) + std::pow(0.2, s), 1.0, 1e-10);
    // Overlapping systems can exceed 1; the report caps at the ambient dimension.
    const auto over = similarity_dimension(Ifs({{0.6, 0.0}, {0.6, 0.4}}));
    EXPECT_GT(over.raw, 1.0);
    EXPECT_TRUE(over.was_capped);
    EXPECT_EQ(over.capped, 1.0);
}

TEST(AttractorCover, Examples)
{
    EXPECT_EQ(attractor_cover(Ifs({{0.5, 0.0}, {0.5, 0.5}}), 5), IntervalFamily::full(5));
    EXPECT_EQ(attractor_cover(Ifs({{0.5, 0.0}}), 4), IntervalFamily{DyadicInterval(4, 0)});
}

TEST(AttractorCover, CantorMatchesOrbitSampling)
{
    for (int n : {4, 6, 8}) {
        const auto c = attractor_cover(cantor(), n);
        const auto sampled = sampled_cells(n, 12);
        for (auto p : sampled) EXPECT_TRUE(c.contains(DyadicInterval(n, p))) << "n=" << n << " p=" << p;
        EXPECT_LE(c.size(), sampled.size() + 2) << "n=" << n;
    }
}

TEST(AttractorCover, RefinementMonotone)
{
    for (const auto& ifs : {cantor(), Ifs({{0.25, 0.0}, {0.25, 0.5}, {-0.25, 1.0}}), Ifs({{0.4, 0.0}, {0.3, 0.7}})}) {
        for (int n = 1; n <= 12; ++n) {
            const auto fine = attractor_cover(ifs, n);
            const auto coarse = attractor_cover(ifs, n - 1);
            for (const auto& d : fine) ASSERT_TRUE(coarse.contains(d.ancestor(n - 1)));
        }
    }
}

TEST(AttractorCover, BoxSlopeMatchesSimilarityDimension)
{
    for (const auto& ifs : {cantor(), Ifs({{0.25, 0.0}, {0.25, 0.5}, {-0.25, 1.0}}), Ifs({{0.4, 0.0}, {0.3, 0.7}}),
                            Ifs({{0.2, 0.0}, {0.2, 0.4}, {0.2, 0.8}})}) {
        ASSERT_TRUE(check_disjoint_images(ifs));
        const auto h = CoverHierarchy::build(8, 16, [&](int n) { return attractor_cover(ifs, n); }, true);
        const auto est = minkowski_slopes(h, 8, 16);
        EXPECT_NEAR(est.slope, similarity_dimension(ifs).capped, 0.05);
    }
}

TEST(AttractorCover, SizeBound)
{
    EXPECT_THROW(attractor_cover(Ifs({{0.5, 0.0}, {0.5, 0.5}}), 30), ResourceError);
}

TEST(CheckDisjointImages, Examples)
{
    EXPECT_TRUE(check_disjoint_images(cantor()));
    EXPECT_FALSE(check_disjoint_images(Ifs({{0.5, 0.0}, {0.5, 0.25}})));
    EXPECT_TRUE(check_disjoint_images(Ifs({{0.5, 0.0}, {0.5, 0.5}})));
    EXPECT_TRUE(check_disjoint_images(Ifs({{-0.5, 0.5}, {0.5, 0.5}})));
}

TEST(IfsJson, Parses)
{
    const auto ifs = ifs_from_json(nlohmann::json::parse("[[0.3333333333333333, 0], [0.3333333333333333, 0.6666666666666666]]"));
    EXPECT_EQ(ifs.size(), 2u);
    EXPECT_THROW(ifs_from_json(nlohmann::json::parse("[[0.5]]")), ParseError);
    EXPECT_THROW(ifs_from_json(nlohmann::json::parse("{}")), ParseError);
}
