#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dimlab/digit_set.hpp"
#include "dimlab/estimators.hpp"
#include "dimlab/percolation.hpp"

using namespace dimlab;

namespace {

CoverHierarchy digit_hierarchy(const DigitSetSpec& spec, int lo, int hi)
{
    return CoverHierarchy::build(lo, hi, [&](int n) { return cover(spec, n); }, true);
}

} // namespace

TEST(MinkowskiSlopes, Examples)
{
    const auto full = CoverHierarchy::build(1, 12, [](int n) { return IntervalFamily::full(n); }, true);
    EXPECT_NEAR(minkowski_slopes(full, 1, 12).slope, 1.0, 1e-12);
    const auto single = CoverHierarchy::build(1, 12, [](int n) { return IntervalFamily{DyadicInterval(n, 0)}; }, true);
    EXPECT_NEAR(minkowski_slopes(single, 1, 12).slope, 0.0, 1e-12);
    const auto h = digit_hierarchy(DigitSetSpec::periodic("10"), 8, 20);
    const auto est = minkowski_slopes(h, 8, 20);
    EXPECT_NEAR(est.slope, 0.5, 0.02);
    for (int n = 8; n <= 20; ++n) EXPECT_EQ(h.size_at(n), std::uint64_t{1} << ((n + 1) / 2));
    EXPECT_LE(est.lower, est.upper);
}

TEST(MinkowskiSlopes, RejectsBadWindowsAndEmptyCovers)
{
    const auto full = CoverHierarchy::build(1, 12, [](int n) { return IntervalFamily::full(std::min(n, 12)); }, true);
    EXPECT_THROW(minkowski_slopes(full, 1, 4), InvalidArgument);
    EXPECT_THROW(minkowski_slopes(full, 0, 8), InvalidArgument);
    const auto gap = CoverHierarchy::build(1, 6, [](int n) { return n == 3 ? IntervalFamily{} : IntervalFamily::full(n); },
                                           false);
    EXPECT_THROW(minkowski_slopes(gap, 1, 6), InvalidArgument);
}

TEST(CoverHierarchy, ValidatesOrdersAndRefinement)
{
    EXPECT_THROW(CoverHierarchy(2, {IntervalFamily{DyadicInterval(3, 0)}}, false), InvalidArgument);
    EXPECT_THROW(CoverHierarchy(1, {IntervalFamily{DyadicInterval(1, 0)}, IntervalFamily{DyadicInterval(2, 3)}}, true),
                 InvalidArgument);
    EXPECT_NO_THROW(CoverHierarchy(1, {IntervalFamily{DyadicInterval(1, 0)}, IntervalFamily{DyadicInterval(2, 3)}}, false));
    const auto h = CoverHierarchy::from_finest(IntervalFamily{DyadicInterval(6, 5), DyadicInterval(6, 40)}, 2, 6);
    EXPECT_EQ(h.at(2), (IntervalFamily{DyadicInterval(2, 0), DyadicInterval(2, 2)}));
    EXPECT_EQ(h.size_at(6), 2u);
}

TEST(WindowAssouad, Examples)
{
    const auto full = CoverHierarchy::build(0, 16, [](int n) { return IntervalFamily::full(n); }, true);
    EXPECT_DOUBLE_EQ(window_assouad(full, 0.25, 8), 1.0);
    // Periodic "10": the densest admissible window has length 9 and five digits.
    const auto periodic = digit_hierarchy(DigitSetSpec::periodic("10"), 0, 20);
    EXPECT_DOUBLE_EQ(window_assouad(periodic, 0.25, 8), 5.0 / 9.0);
    EXPECT_NEAR(window_assouad(periodic, 0.25, 8), 0.5, 0.06);
    // Truncated at the end of (8,16].
    const auto sq = DigitSetSpec::blocks({2, Fraction(2), Fraction(1), BlockGrowth::squared});
    EXPECT_GE(window_assouad(digit_hierarchy(sq, 0, 16), 0.25, 8), 0.95);
    EXPECT_TRUE(std::isnan(window_assouad(full, 0.25, 40)));
    EXPECT_THROW(window_assouad(CoverHierarchy(1, {IntervalFamily{DyadicInterval(1, 0)}}, false), 0.2), InvalidArgument);
}

TEST(WindowAssouad, MatchesDigitDensityOracle)
{
    // For D_S covers, the window value is max of |S cap (m,n]| / (n - m) over admissible windows.
    for (const auto& spec : {DigitSetSpec::periodic("110"), DigitSetSpec::periodic("1000", "11"),
                             DigitSetSpec::blocks({3, Fraction(3, 2), Fraction(2), BlockGrowth::geometric})}) {
        const auto h = digit_hierarchy(spec, 0, 20);
        for (double eps : {0.1, 0.25, 0.5}) {
            double best = 0.0;
            for (int n = 1; n <= 20; ++n)
                for (int m = 0; m < n; ++m)
                    if (n - m >= 8 && m <= (1 - eps) * n)
                        best = std::max(best, static_cast<double>(spec.count(m, n)) / (n - m));
            EXPECT_NEAR(window_assouad(h, eps, 8), best, 1e-12);
        }
    }
}

TEST(WindowAssouad, MonotoneInEpsAndAboveUpperMinkowski)
{
    std::vector<CoverHierarchy> hs;
    hs.push_back(digit_hierarchy(DigitSetSpec::periodic("10"), 1, 20));
    hs.push_back(digit_hierarchy(DigitSetSpec::blocks({2, Fraction(2), Fraction(1), BlockGrowth::squared}), 1, 20));
    hs.push_back(digit_hierarchy(DigitSetSpec::blocks({1, Fraction(2), Fraction(2), BlockGrowth::geometric}), 1, 20));
    for (std::uint64_t seed = 0; seed < 20 && hs.size() < 6; ++seed) {
        const auto s = simulate(0.4, 16, seed);
        if (s.survived()) hs.push_back(CoverHierarchy::from_finest(s.family(16), 1, 16));
    }
    for (const auto& h : hs) {
        double prev = std::numeric_limits<double>::infinity();
        for (double eps : {0.05, 0.1, 0.2, 0.3, 0.4}) {
            const double v = window_assouad(h, eps, 4);
            EXPECT_LE(v, prev);
            prev = v;
        }
        const auto est = minkowski_slopes(h, 8, h.last_order());
        EXPECT_LE(est.upper, window_assouad(h, 0.05, 4) + 0.05);
    }
}

TEST(Report, Examples)
{
    const auto exact = exact_dims(DigitSetSpec::periodic("10"));
    const auto merged = report(exact, {});
    EXPECT_EQ(merged.hausdorff.method, Method::exact);
    EXPECT_EQ(merged.assouad.method, Method::exact);

    DimensionEstimates est;
    est.minkowski = MinkowskiEstimate{0.48, 0.52, 0.5, 0.01};
    const auto r = report(std::nullopt, est);
    EXPECT_EQ(r.hausdorff.method, Method::estimated);
    EXPECT_LE(r.hausdorff.value, r.packing.value);
    EXPECT_FALSE(r.modified_assouad.present());

    DimensionEstimates conflict;
    conflict.quasi_assouad = DimensionValue{0.9, Method::estimated, 0.05};
    EXPECT_THROW(report(exact, conflict), ValidationError);
    DimensionEstimates agree;
    agree.quasi_assouad = DimensionValue{0.52, Method::estimated, 0.05};
    EXPECT_NO_THROW(report(exact, agree));
}

TEST(Report, ChainViolationIsAValidationError)
{
    DimensionEstimates est;
    est.minkowski = MinkowskiEstimate{0.3, 0.8, 0.6, 0.01};
    est.quasi_assouad = DimensionValue{0.5, Method::estimated, 0.02};
    EXPECT_THROW(report(std::nullopt, est), ValidationError);
    est.quasi_assouad = DimensionValue{0.5, Method::estimated, 0.4};
    EXPECT_NO_THROW(report(std::nullopt, est));
}

TEST(Report, JsonAndCsv)
{
    const auto r = exact_dims(DigitSetSpec::blocks({2, Fraction(2), Fraction(1), BlockGrowth::squared}));
    const auto j = to_json(r);
    EXPECT_EQ(j["packing"]["value"].get<double>(), 0.5);
    EXPECT_EQ(j["packing"]["method"].get<std::string>(), "exact");
    std::ostringstream os;
    write_report_csv_header(os);
    write_report_csv(os, r);
    EXPECT_EQ(os.str(), "dimension,value,method,uncertainty\nhausdorff,0,exact,0\npacking,0.5,exact,0\n"
                        "modified_assouad,1,exact,0\nassouad,1,exact,0\n");
}
