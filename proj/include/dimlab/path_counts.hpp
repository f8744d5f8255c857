#pragma once

// Counting quantities of a sampled path against interval families: G_{n,q}, P_{n,q},
// the events they define, level and record sets, preimage covers and the
// adversarial witness search for digit sets.
//
// B(U) over a dyadic U is represented by the [min, max] envelope of the grid values
// inside U (endpoints included). The envelope can be widened by the uniform
// modulus at the grid step to make intersection tests conservative.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dimlab/digit_set.hpp"
#include "dimlab/dyadic.hpp"
#include "dimlab/error.hpp"
#include "dimlab/fbm.hpp"
#include "dimlab/numeric.hpp"

namespace dimlab {

/// Min/max pyramid of a path: range(n, p) is the grid envelope of B over I_{n,p}.
class PathRanges {
public:
    explicit PathRanges(const FbmPath& path, bool conservative = false) : path_(&path)
    {
        const int top = path.order();
        const auto v = path.values();
        lo_.resize(static_cast<std::size_t>(top) + 1);
        hi_.resize(static_cast<std::size_t>(top) + 1);
        const double widen = conservative ? grid_modulus(path.hurst(), top) : 0.0;
        auto& blo = lo_[static_cast<std::size_t>(top)];
        auto& bhi = hi_[static_cast<std::size_t>(top)];
        blo.resize(path.steps());
        bhi.resize(path.steps());
        for (std::size_t k = 0; k < path.steps(); ++k) {
            blo[k] = std::min(v[k], v[k + 1]) - widen;
            bhi[k] = std::max(v[k], v[k + 1]) + widen;
        }
        for (int n = top - 1; n >= 0; --n) {
            const auto& clo = lo_[static_cast<std::size_t>(n) + 1];
            const auto& chi = hi_[static_cast<std::size_t>(n) + 1];
            auto& plo = lo_[static_cast<std::size_t>(n)];
            auto& phi = hi_[static_cast<std::size_t>(n)];
            plo.resize(clo.size() / 2);
            phi.resize(chi.size() / 2);
            for (std::size_t p = 0; p < plo.size(); ++p) {
                plo[p] = std::min(clo[2 * p], clo[2 * p + 1]);
                phi[p] = std::max(chi[2 * p], chi[2 * p + 1]);
            }
        }
    }

    [[nodiscard]] const FbmPath& path() const { return *path_; }
    [[nodiscard]] int order() const { return path_->order(); }

    [[nodiscard]] std::pair<double, double> range(int n, std::uint64_t p) const
    {
        detail::require<InvalidArgument>(n >= 0 && n <= order(), "range order exceeds path order");
        return {lo_[static_cast<std::size_t>(n)][p], hi_[static_cast<std::size_t>(n)][p]};
    }

    [[nodiscard]] std::pair<double, double> range(const DyadicInterval& d) const { return range(d.order(), d.index()); }

    /// B at the left endpoint of I_{n,p}.
    [[nodiscard]] double left_value(int n, std::uint64_t p) const
    {
        return path_->at(static_cast<std::size_t>(p) << (order() - n));
    }

private:
    const FbmPath* path_;
    std::vector<std::vector<double>> lo_;
    std::vector<std::vector<double>> hi_;
};

namespace detail {

inline void require_order(const PathRanges& r, int n)
{
    require<InvalidArgument>(n >= 0 && n <= r.order(), "count order " + std::to_string(n) + " exceeds path order " +
                                                             std::to_string(r.order()));
}

} // namespace detail

/// G_{n,q}(U): order-n members whose envelope meets the closed J_{n,q}.
inline std::uint64_t g_count(const PathRanges& ranges, const IntervalFamily& family, int n, std::int64_t q)
{
    detail::require_order(ranges, n);
    const ValueInterval j(n, q, ranges.path().hurst());
    std::uint64_t count = 0;
    for (const auto& d : family.of_order(n)) {
        const auto [lo, hi] = ranges.range(d);
        if (j.meets(lo, hi)) ++count;
    }
    return count;
}

inline std::uint64_t g_count(const FbmPath& path, const IntervalFamily& family, int n, std::int64_t q)
{
    detail::require<InvalidArgument>(n <= path.order(), "g_count: n exceeds path order");
    return g_count(PathRanges(path), family, n, q);
}

/// P_{n,q}(U): order-n members whose left-endpoint value lies in the half-open J_{n,q}.
inline std::uint64_t p_count(const PathRanges& ranges, const IntervalFamily& family, int n, std::int64_t q)
{
    detail::require_order(ranges, n);
    const double alpha = ranges.path().hurst();
    std::uint64_t count = 0;
    for (const auto& d : family.of_order(n))
        if (ValueInterval::index_of(ranges.left_value(n, d.index()), n, alpha) == q) ++count;
    return count;
}

inline std::uint64_t p_count(const FbmPath& path, const IntervalFamily& family, int n, std::int64_t q)
{
    detail::require<InvalidArgument>(n <= path.order(), "p_count: n exceeds path order");
    return p_count(PathRanges(path), family, n, q);
}

/// One row per checked scale.
struct EventRow {
    int n = 0;
    /// Index attaining the worst count (a value index q, or an order m for window events).
    std::int64_t arg = 0;
    std::uint64_t count = 0;
    double threshold = 0.0;
    bool pass = true;
};

struct EventReport {
    std::string event;
    std::vector<EventRow> rows;

    [[nodiscard]] bool pass() const
    {
        return std::all_of(rows.begin(), rows.end(), [](const EventRow& r) { return r.pass; });
    }

    /// CSV columns n, max_q, count, threshold, pass.
    void write_csv(std::ostream& os, bool header = true) const
    {
        if (header) os << "n,max_q,count,threshold,pass\n";
        for (const auto& r : rows)
            os << r.n << ',' << r.arg << ',' << r.count << ',' << r.threshold << ',' << (r.pass ? 1 : 0) << '\n';
    }
};

/// Per-q histogram of G_{n,.}: for each member, every q whose closed J meets its envelope.
inline std::map<std::int64_t, std::uint64_t> g_histogram(const PathRanges& ranges,
                                                         std::span<const DyadicInterval> members, int n)
{
    const double alpha = ranges.path().hurst();
    std::map<std::int64_t, std::uint64_t> hist;
    for (const auto& d : members) {
        const auto [lo, hi] = ranges.range(n, d.index());
        const auto [q0, q1] = ValueInterval::closed_index_range(lo, hi, n, alpha);
        for (auto q = q0; q <= q1; ++q) ++hist[q];
    }
    return hist;
}

namespace detail {

inline EventRow worst_row(int n, const std::map<std::int64_t, std::uint64_t>& hist, double threshold)
{
    EventRow row;
    row.n = n;
    row.threshold = threshold;
    for (const auto& [q, c] : hist) {
        if (c > row.count) {
            row.count = c;
            row.arg = q;
        }
    }
    row.pass = static_cast<double>(row.count) <= threshold;
    return row;
}

} // namespace detail

/// Gamma(U, eps) restricted to n in [n_lo, n_hi]: max_q G_{n,q}(U) <= 2^{eps n}.
inline EventReport gamma_event(const PathRanges& ranges, const IntervalFamily& family, double eps, int n_lo, int n_hi)
{
    detail::require<InvalidArgument>(eps > 0.0, "gamma_event: eps must be positive");
    detail::require_order(ranges, n_hi);
    EventReport rep{"gamma", {}};
    for (int n = std::max(n_lo, 0); n <= n_hi; ++n)
        rep.rows.push_back(detail::worst_row(n, g_histogram(ranges, family.of_order(n), n), std::exp2(eps * n)));
    return rep;
}

inline EventReport gamma_event(const FbmPath& path, const IntervalFamily& family, double eps, int n_lo, int n_hi)
{
    detail::require<InvalidArgument>(n_hi <= path.order(), "gamma_event: n_hi exceeds path order");
    return gamma_event(PathRanges(path), family, eps, n_lo, n_hi);
}

/// Pi(U, eps) restricted to n in [n_lo, n_hi]: P_{n,q}(U) <= 2^{eps n} for |q| <= n 2^{alpha n}.
inline EventReport pi_event(const PathRanges& ranges, const IntervalFamily& family, double eps, int n_lo, int n_hi)
{
    detail::require<InvalidArgument>(eps > 0.0, "pi_event: eps must be positive");
    detail::require_order(ranges, n_hi);
    const double alpha = ranges.path().hurst();
    EventReport rep{"pi", {}};
    for (int n = std::max(n_lo, 0); n <= n_hi; ++n) {
        const double qmax = n * std::exp2(alpha * n);
        std::map<std::int64_t, std::uint64_t> hist;
        for (const auto& d : family.of_order(n)) {
            const auto q = ValueInterval::index_of(ranges.left_value(n, d.index()), n, alpha);
            if (std::abs(static_cast<double>(q)) <= qmax) ++hist[q];
        }
        rep.rows.push_back(detail::worst_row(n, hist, std::exp2(eps * n)));
    }
    return rep;
}

inline EventReport pi_event(const FbmPath& path, const IntervalFamily& family, double eps, int n_lo, int n_hi)
{
    detail::require<InvalidArgument>(n_hi <= path.order(), "pi_event: n_hi exceeds path order");
    return pi_event(PathRanges(path), family, eps, n_lo, n_hi);
}

/// Order-n intervals on whose grid points B - y changes sign or vanishes.
inline IntervalFamily level_set(const PathRanges& ranges, double y, int n)
{
    detail::require_order(ranges, n);
    std::vector<std::uint64_t> idx;
    for (std::uint64_t p = 0; p < (std::uint64_t{1} << n); ++p) {
        const auto [lo, hi] = ranges.range(n, p);
        if (lo <= y && y <= hi) idx.push_back(p);
    }
    return IntervalFamily::from_indices(n, idx);
}

inline IntervalFamily level_set(const FbmPath& path, double y, int n)
{
    detail::require<InvalidArgument>(n <= path.order(), "level_set: n exceeds path order");
    return level_set(PathRanges(path), y, n);
}

/// Grid indices k with B(k) >= max_{j <= k} B(j).
inline std::vector<std::size_t> record_points(const FbmPath& path)
{
    std::vector<std::size_t> out;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= path.steps(); ++k) {
        if (path.at(k) >= best) {
            best = path.at(k);
            out.push_back(k);
        }
    }
    return out;
}

/// Order-n intervals containing a grid record time (ties count as records).
inline IntervalFamily record_set(const FbmPath& path, int n)
{
    detail::require<InvalidArgument>(n >= 0 && n <= path.order(), "record_set: n exceeds path order");
    const int shift = path.order() - n;
    const auto last = (std::uint64_t{1} << n) - 1;
    std::vector<std::uint64_t> idx;
    for (auto k : record_points(path)) {
        // A grid point on a cell boundary belongs to both neighbouring closed intervals.
        const auto p = static_cast<std::uint64_t>(k >> shift);
        const bool boundary = (k & ((std::size_t{1} << shift) - 1)) == 0;
        if (p <= last) idx.push_back(p);
        if (boundary && p > 0) idx.push_back(p - 1);
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return IntervalFamily::from_indices(n, idx);
}

/// Members of the order-n cover whose envelope meets some interval of E.
inline IntervalFamily preimage_cover(const PathRanges& ranges, std::span<const ValueInterval> targets,
                                     const IntervalFamily& d_cover, int n)
{
    detail::require_order(ranges, n);
    std::vector<std::uint64_t> idx;
    for (const auto& d : d_cover.of_order(n)) {
        const auto [lo, hi] = ranges.range(d);
        if (std::any_of(targets.begin(), targets.end(), [&](const ValueInterval& j) { return j.meets(lo, hi); }))
            idx.push_back(d.index());
    }
    return IntervalFamily::from_indices(n, idx);
}

inline IntervalFamily preimage_cover(const FbmPath& path, std::span<const ValueInterval> targets,
                                     const IntervalFamily& d_cover, int n)
{
    detail::require<InvalidArgument>(n <= path.order(), "preimage_cover: n exceeds path order");
    return preimage_cover(PathRanges(path), targets, d_cover, n);
}

/// Number of order-n value intervals met by the envelopes of the given order-n indices.
inline std::uint64_t image_box_count(const PathRanges& ranges, std::span<const std::uint64_t> indices, int n)
{
    const double alpha = ranges.path().hurst();
    std::vector<std::pair<std::int64_t, std::int64_t>> spans;
    spans.reserve(indices.size());
    for (auto p : indices) {
        const auto [lo, hi] = ranges.range(n, p);
        spans.push_back(ValueInterval::closed_index_range(lo, hi, n, alpha));
    }
    std::sort(spans.begin(), spans.end());
    std::uint64_t total = 0;
    std::int64_t covered_to = std::numeric_limits<std::int64_t>::min();
    for (const auto& [a, b] : spans) {
        const auto start = std::max(a, covered_to == std::numeric_limits<std::int64_t>::min() ? a : covered_to + 1);
        if (b >= start) total += static_cast<std::uint64_t>(b - start + 1);
        covered_to = std::max(covered_to, b);
    }
    return total;
}

/// Diagnostics of one refinement level of the witness search.
struct WitnessLevel {
    int m = 0;
    int n = 0;
    /// Window members per kept parent, 2^{|S cap (m,n]|}.
    std::uint64_t population = 0;
    /// Parents entering the level.
    std::uint64_t parents = 0;
    /// Members kept across all parents.
    std::uint64_t kept = 0;
    /// Smallest per-parent kept count.
    std::uint64_t min_kept = 0;
    /// 2^{eps (n-m)} / (3n).
    double collision_threshold = 0.0;
    /// Value intervals of order n met by the kept members.
    std::uint64_t image_boxes = 0;
};

struct WitnessResult {
    bool found = false;
    std::string reason;
    /// Cover of the witness at the final order.
    IntervalFamily family;
    std::vector<WitnessLevel> levels;
    /// Orders, cover sizes and image box counts of the witness hierarchy.
    std::vector<int> orders;
    std::vector<std::uint64_t> cover_sizes;
    std::vector<std::uint64_t> image_sizes;
    /// Least-squares slope of log2 cover size against n.
    double witness_slope = 0.0;
    /// Least-squares slope of log2 image boxes against alpha n.
    double image_slope = 0.0;

    /// CSV columns level, m, n, population, parents, kept, min_kept, collision_threshold, image_boxes.
    void write_csv(std::ostream& os) const
    {
        os << "level,m,n,population,parents,kept,min_kept,collision_threshold,image_boxes\n";
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const auto& l = levels[i];
            os << i + 1 << ',' << l.m << ',' << l.n << ',' << l.population << ',' << l.parents << ',' << l.kept << ','
               << l.min_kept << ',' << l.collision_threshold << ',' << l.image_boxes << '\n';
        }
    }
};

struct WitnessOptions {
    /// A level is only run when its window population is at least this large.
    std::uint64_t min_population = 8;
    int min_window = 4;
};

/// Adversarial witness inside D_S: repeatedly find a dense window (m, n), and inside
/// each kept order-m interval keep only the order-n members of D_S whose envelopes
/// meet the most popular value interval J in J_n (smallest q on ties). The kept
/// members seed the next level. The witness collapses its image, so its image slope
/// falls below (1/alpha) times its own slope when dim_MA D_S > alpha.
inline WitnessResult witness_search(const PathRanges& ranges, const DigitSetSpec& spec, double alpha, double eps,
                                    int depth, WitnessOptions opt = {})
{
    detail::require<InvalidArgument>(depth <= ranges.order(), "witness_search: depth exceeds path order");
    WitnessResult res;
    std::vector<std::uint64_t> current;
    int order = -1;
    int m_min = 0;
    for (;;) {
        std::optional<DenseWindow> win;
        for (int cap = m_min + opt.min_window; cap <= depth && !win; ++cap) {
            win = find_dense_window(spec, alpha, eps, cap, {m_min, opt.min_window});
        }
        if (!win) break;
        if ((std::uint64_t{1} << std::min<std::int64_t>(win->log2_population, 62)) < opt.min_population) {
            m_min = win->n;
            continue;
        }
        if (order < 0) {
            current = cylinder_indices(spec, win->m);
            order = win->m;
        } else {
            // Pad from the current order to the window start with the forced digits of D_S.
            std::vector<std::uint64_t> grown;
            const auto pad = cylinder_indices(spec, win->m, order);
            for (auto p : current)
                for (auto off : pad) grown.push_back((p << (win->m - order)) | off);
            std::sort(grown.begin(), grown.end());
            current = std::move(grown);
            order = win->m;
        }
        const auto offsets = cylinder_indices(spec, win->n, win->m);
        WitnessLevel level;
        level.m = win->m;
        level.n = win->n;
        level.population = offsets.size();
        level.parents = current.size();
        level.collision_threshold = std::exp2(eps * (win->n - win->m)) / (3.0 * win->n);
        level.min_kept = std::numeric_limits<std::uint64_t>::max();
        std::vector<std::uint64_t> kept;
        const int shift = win->n - win->m;
        for (auto parent : current) {
            std::vector<DyadicInterval> members;
            members.reserve(offsets.size());
            for (auto off : offsets) members.emplace_back(win->n, (parent << shift) | off);
            const auto hist = g_histogram(ranges, members, win->n);
            std::int64_t best_q = 0;
            std::uint64_t best = 0;
            for (const auto& [q, c] : hist)
                if (c > best) {
                    best = c;
                    best_q = q;
                }
            const ValueInterval j(win->n, best_q, alpha);
            std::uint64_t here = 0;
            for (const auto& d : members) {
                const auto [lo, hi] = ranges.range(d);
                if (j.meets(lo, hi)) {
                    kept.push_back(d.index());
                    ++here;
                }
            }
            level.min_kept = std::min(level.min_kept, here);
        }
        std::sort(kept.begin(), kept.end());
        level.kept = kept.size();
        level.image_boxes = image_box_count(ranges, kept, win->n);
        res.levels.push_back(level);
        current = std::move(kept);
        order = win->n;
        m_min = win->n;
        if (m_min >= depth) break;
    }
    if (res.levels.empty()) {
        res.reason = "no dense window up to depth " + std::to_string(depth) +
                     " (consistent with modified Assouad dimension <= alpha)";
        return res;
    }
    res.found = true;
    res.family = IntervalFamily::from_indices(order, current);
    const int first = res.levels.front().m;
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> ax;
    std::vector<double> ay;
    for (int n = first; n <= order; ++n) {
        std::vector<std::uint64_t> idx;
        for (auto p : current) idx.push_back(p >> (order - n));
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        const auto img = image_box_count(ranges, idx, n);
        res.orders.push_back(n);
        res.cover_sizes.push_back(idx.size());
        res.image_sizes.push_back(img);
        xs.push_back(n);
        ys.push_back(std::log2(static_cast<double>(idx.size())));
        ax.push_back(alpha * n);
        ay.push_back(std::log2(static_cast<double>(img)));
    }
    if (xs.size() >= 2) {
        res.witness_slope = fit_line(xs, ys).slope;
        res.image_slope = fit_line(ax, ay).slope;
    }
    return res;
}

inline WitnessResult witness_search(const FbmPath& path, const DigitSetSpec& spec, double alpha, double eps, int depth,
                                    WitnessOptions opt = {})
{
    return witness_search(PathRanges(path), spec, alpha, eps, depth, opt);
}

} // namespace dimlab
