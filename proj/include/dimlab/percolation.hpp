#pragma once

// Fractal percolation on the binary tree: every child of a kept dyadic interval is
// kept independently with probability p = 2^-gamma, so generation sizes Z_k form a
// Galton-Watson process with Binomial(2, p) offspring.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dimlab/dyadic.hpp"
#include "dimlab/error.hpp"
#include "dimlab/numeric.hpp"
#include "dimlab/path_counts.hpp"
#include "dimlab/rng.hpp"

namespace dimlab {

inline constexpr int kMaxPercolationDepth = 24;

struct PercolationOptions {
    /// Overrides 2^-gamma (p = 1 keeps the full tree).
    std::optional<double> keep_probability;
};

class PercolationSample {
public:
    PercolationSample(double gamma, int depth, std::uint64_t seed, double keep, std::vector<std::vector<std::uint64_t>> levels)
        : gamma_(gamma), depth_(depth), seed_(seed), keep_(keep), levels_(std::move(levels))
    {
        detail::require<InvalidArgument>(levels_.size() == static_cast<std::size_t>(depth_) + 1,
                                         "percolation sample needs depth + 1 levels");
        for (int k = 1; k <= depth_; ++k) {
            const auto& parents = levels_[static_cast<std::size_t>(k) - 1];
            for (auto i : levels_[static_cast<std::size_t>(k)]) {
                detail::require<InvalidArgument>(i < (std::uint64_t{1} << k), "kept index out of range");
                detail::require<InvalidArgument>(std::binary_search(parents.begin(), parents.end(), i >> 1),
                                                 "kept interval without kept parent");
            }
        }
    }

    [[nodiscard]] double gamma() const { return gamma_; }
    [[nodiscard]] int depth() const { return depth_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] double keep_probability() const { return keep_; }

    /// Sorted kept indices of generation k (generation 0 is the unit interval).
    [[nodiscard]] const std::vector<std::uint64_t>& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }

    [[nodiscard]] bool survived() const { return !levels_.back().empty(); }

    [[nodiscard]] IntervalFamily family(int k) const { return IntervalFamily::from_indices(k, level(k)); }

    /// Generation k as a bitmap of 2^k bits, most significant bit first, in hex.
    [[nodiscard]] std::string hex_level(int k) const
    {
        const std::size_t bits = std::size_t{1} << k;
        std::string out((bits + 3) / 4, '0');
        for (auto i : level(k)) {
            const std::size_t nib = i / 4;
            const int bit = 3 - static_cast<int>(i % 4);
            const int v = (out[nib] <= '9' ? out[nib] - '0' : out[nib] - 'a' + 10) | (1 << bit);
            out[nib] = static_cast<char>(v < 10 ? '0' + v : 'a' + v - 10);
        }
        return out;
    }

    /// Writes "k <hex bitmap>" per generation.
    void write_levels(std::ostream& os) const
    {
        for (int k = 0; k <= depth_; ++k) os << k << ' ' << hex_level(k) << '\n';
    }

private:
    double gamma_;
    int depth_;
    std::uint64_t seed_;
    double keep_;
    std::vector<std::vector<std::uint64_t>> levels_;
};

/// Node (k, i) is kept iff its keyed uniform draw is below p, so a sample depends only on the seed.
inline PercolationSample simulate(double gamma, int depth, std::uint64_t seed, PercolationOptions opt = {})
{
    detail::require<InvalidArgument>(gamma > 0.0 && gamma < 1.0, "percolation gamma must lie in (0,1)");
    detail::require<ResourceError>(depth >= 0 && depth <= kMaxPercolationDepth, "percolation depth exceeds 24");
    const double p = opt.keep_probability.value_or(std::exp2(-gamma));
    detail::require<InvalidArgument>(p >= 0.0 && p <= 1.0, "keep probability must lie in [0,1]");
    std::vector<std::vector<std::uint64_t>> levels(static_cast<std::size_t>(depth) + 1);
    levels[0] = {0};
    for (int k = 1; k <= depth; ++k) {
        auto& out = levels[static_cast<std::size_t>(k)];
        for (auto parent : levels[static_cast<std::size_t>(k) - 1]) {
            for (std::uint64_t child = 2 * parent; child < 2 * parent + 2; ++child)
                if (keyed_uniform(seed, child, static_cast<std::uint64_t>(k)) < p) out.push_back(child);
        }
    }
    return {gamma, depth, seed, p, std::move(levels)};
}

/// Z_1..Z_depth.
inline std::vector<std::uint64_t> survivor_counts(const PercolationSample& s)
{
    std::vector<std::uint64_t> z;
    for (int k = 1; k <= s.depth(); ++k) z.push_back(s.level(k).size());
    return z;
}

/// For every n <= depth: N_n(I) <= n^2 2^{(1-gamma)(n-m)} for all m <= (1-eps) n and kept I of order m.
/// Each row reports the window (m in the arg column) with the largest count-to-threshold ratio.
inline EventReport window_event(const PercolationSample& s, double eps)
{
    detail::require<InvalidArgument>(eps > 0.0 && eps < 1.0, "window_event: eps must lie in (0,1)");
    EventReport rep{"percolation_window", {}};
    const double growth = 1.0 - s.gamma();
    for (int n = 1; n <= s.depth(); ++n) {
        EventRow row;
        row.n = n;
        double worst_ratio = -1.0;
        const auto& idx = s.level(n);
        for (int m = 0; m < n && detail::window_admissible(m, n, eps); ++m) {
            const double threshold = static_cast<double>(n) * n * std::exp2(growth * (n - m));
            const auto w = max_group(idx, n - m);
            const double ratio = static_cast<double>(w.count) / threshold;
            if (ratio > worst_ratio) {
                worst_ratio = ratio;
                row.arg = m;
                row.count = w.count;
                row.threshold = threshold;
            }
            if (static_cast<double>(w.count) > threshold) row.pass = false;
        }
        rep.rows.push_back(row);
    }
    return rep;
}

/// Smallest fixed point of e = (1 - p + p e)^2 in [0,1].
inline double extinction_probability_for_keep(double p, double tol = 1e-12)
{
    detail::require<InvalidArgument>(p >= 0.0 && p <= 1.0, "keep probability must lie in [0,1]");
    auto f = [p](double e) { return (1.0 - p + p * e) * (1.0 - p + p * e) - e; };
    if (p <= 0.5) return 1.0;  // mean offspring 2p <= 1
    // f is convex with f(0) >= 0 and f(1) = 0; its minimum sits where 2p(1-p+pe) = 1.
    const double vertex = std::min(1.0, (1.0 / (2.0 * p) - (1.0 - p)) / p);
    if (f(0.0) <= 0.0) return 0.0;
    double lo = 0.0;
    double hi = vertex;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double extinction_probability(double gamma, double tol = 1e-12)
{
    detail::require<InvalidArgument>(gamma > 0.0 && gamma < 1.0, "percolation gamma must lie in (0,1)");
    return extinction_probability_for_keep(std::exp2(-gamma), tol);
}

struct TailRow {
    double k = 0.0;
    double threshold = 0.0;
    std::uint64_t hits = 0;
    double frequency = 0.0;
};

struct TailTable {
    double gamma = 0.0;
    int n = 0;
    std::uint64_t trials = 0;
    std::vector<TailRow> rows;
    /// Fitted c2 in frequency ~ c1 exp(-c2 k) over rows with positive frequency; NaN if fewer than two.
    double decay_rate = std::nan("");
    bool strictly_decreasing = false;

    void write_csv(std::ostream& os) const
    {
        os << "k,threshold,hits,frequency\n";
        for (const auto& r : rows) os << r.k << ',' << r.threshold << ',' << r.hits << ',' << r.frequency << '\n';
    }
};

/// Empirical P(Z_n >= k 2^{(1-gamma) n}) over `trials` samples keyed master ^ t.
inline TailTable tail_check(double gamma, int n, const std::vector<double>& k_values, std::uint64_t trials,
                            std::uint64_t master_seed)
{
    detail::require<InvalidArgument>(trials >= 1000, "tail_check: needs at least 1000 trials");
    detail::require<InvalidArgument>(!k_values.empty(), "tail_check: no k values");
    TailTable t;
    t.gamma = gamma;
    t.n = n;
    t.trials = trials;
    std::vector<std::uint64_t> z;
    z.reserve(trials);
    for (std::uint64_t i = 0; i < trials; ++i)
        z.push_back(simulate(gamma, n, member_seed(master_seed, i)).level(n).size());
    const double mean_growth = std::exp2((1.0 - gamma) * n);
    for (double k : k_values) {
        TailRow r;
        r.k = k;
        r.threshold = k * mean_growth;
        r.hits = static_cast<std::uint64_t>(
            std::count_if(z.begin(), z.end(), [&](auto v) { return static_cast<double>(v) >= r.threshold; }));
        r.frequency = static_cast<double>(r.hits) / static_cast<double>(trials);
        t.rows.push_back(r);
    }
    t.strictly_decreasing = true;
    for (std::size_t i = 1; i < t.rows.size(); ++i)
        if (!(t.rows[i].frequency < t.rows[i - 1].frequency)) t.strictly_decreasing = false;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : t.rows)
        if (r.frequency > 0.0) {
            xs.push_back(r.k);
            ys.push_back(std::log(r.frequency));
        }
    if (xs.size() >= 2) t.decay_rate = -fit_line(xs, ys).slope;
    return t;
}

} // namespace dimlab
