#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dimlab/error.hpp"

namespace dimlab {

/// Exact non-negative-denominator rational, always stored in lowest terms.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Fraction() = default;
    Fraction(std::int64_t n, std::int64_t d = 1) : num(n), den(d)
    {
        detail::require<InvalidArgument>(d != 0, "fraction with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Fraction&, const Fraction&) = default;

    friend bool operator<(const Fraction& a, const Fraction& b)
    {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }

    [[nodiscard]] std::string str() const
    {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }

    friend std::ostream& operator<<(std::ostream& os, const Fraction& f) { return os << f.str(); }
};

/// Parses "p/q", an integer, or a finite decimal such as "1.25" into an exact fraction.
inline Fraction parse_fraction(const std::string& text)
{
    auto fail = [&] { throw ParseError("not a rational number: '" + text + "'"); };
    if (text.empty()) fail();
    if (auto slash = text.find('/'); slash != std::string::npos) {
        try {
            std::size_t used = 0;
            const auto n = std::stoll(text.substr(0, slash), &used);
            if (used != slash) fail();
            const auto rest = text.substr(slash + 1);
            const auto d = std::stoll(rest, &used);
            if (used != rest.size() || d == 0) fail();
            return {n, d};
        } catch (const std::logic_error&) {
            fail();
        }
    }
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool negative = false;
    bool seen_point = false;
    bool seen_digit = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (i == 0 && (c == '-' || c == '+')) {
            negative = c == '-';
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else if (c >= '0' && c <= '9') {
            seen_digit = true;
            if (num > (INT64_MAX - 9) / 10 || (seen_point && den > INT64_MAX / 10)) fail();
            num = num * 10 + (c - '0');
            if (seen_point) den *= 10;
        } else {
            fail();
        }
    }
    if (!seen_digit) fail();
    return {negative ? -num : num, den};
}

/// True iff count > 2^exponent. Integral exponents are compared exactly.
inline bool exceeds_power_of_two(std::uint64_t count, double exponent)
{
    if (exponent == std::floor(exponent) && exponent >= 0.0 && exponent < 63.0) {
        return count > (std::uint64_t{1} << static_cast<int>(exponent));
    }
    return static_cast<double>(count) > std::exp2(exponent);
}

/// Ordinary least-squares fit y = intercept + slope * x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Standard error of the slope from the residuals; 0 for exact fits or two points.
    double slope_stderr = 0.0;
    std::size_t points = 0;
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y)
{
    detail::require<InvalidArgument>(x.size() == y.size(), "fit_line: size mismatch");
    detail::require<InvalidArgument>(x.size() >= 2, "fit_line: need at least two points");
    const auto k = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    detail::require<InvalidArgument>(sxx > 0.0, "fit_line: degenerate abscissae");
    LinearFit fit;
    fit.points = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            ssr += r * r;
        }
        fit.slope_stderr = std::sqrt(ssr / (k - 2.0) / sxx);
    }
    return fit;
}

/// Least-squares slope of log2(counts[i]) against scale[i]. Zero counts are an error.
inline LinearFit log2_slope(std::span<const double> scale, std::span<const std::uint64_t> counts)
{
    std::vector<double> y;
    y.reserve(counts.size());
    for (auto c : counts) {
        detail::require<InvalidArgument>(c > 0, "log2_slope: empty cover at some order");
        y.push_back(std::log2(static_cast<double>(c)));
    }
    return fit_line(scale, y);
}

struct MeanStat {
    double mean = 0.0;
    double stddev = 0.0;
    double stderr_mean = 0.0;
};

inline MeanStat mean_stat(std::span<const double> v)
{
    MeanStat s;
    if (v.empty()) return s;
    const auto k = static_cast<double>(v.size());
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / k;
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / (k - 1.0));
        s.stderr_mean = s.stddev / std::sqrt(k);
    }
    return s;
}

} // namespace dimlab
