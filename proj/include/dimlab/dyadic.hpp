#pragma once

// Dyadic time intervals, value intervals and finite interval families, together
// with the window counts N_n(U, I) and N_{m,n}(U), beta-content, the balanced
// family predicate and the rebalancing / tail-splitting algorithms.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dimlab/error.hpp"
#include "dimlab/numeric.hpp"

namespace dimlab {

inline constexpr int kMaxOrder = 60;

/// [p 2^-n, (p+1) 2^-n] with 0 <= p < 2^n and n <= kMaxOrder.
class DyadicInterval {
public:
    constexpr DyadicInterval() = default;

    DyadicInterval(int order, std::uint64_t index) : order_(order), index_(index)
    {
        detail::require<ResourceError>(order >= 0 && order <= kMaxOrder,
                                       "dyadic order " + std::to_string(order) + " outside [0, 60]");
        detail::require<InvalidArgument>(index < (std::uint64_t{1} << order),
                                         "dyadic index " + std::to_string(index) + " out of range for order " +
                                             std::to_string(order));
    }

    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] std::uint64_t index() const { return index_; }
    [[nodiscard]] double diameter() const { return std::ldexp(1.0, -order_); }
    [[nodiscard]] double left() const { return std::ldexp(static_cast<double>(index_), -order_); }
    [[nodiscard]] double right() const { return std::ldexp(static_cast<double>(index_ + 1), -order_); }

    /// True iff `other` is a subset of this interval.
    [[nodiscard]] bool contains(const DyadicInterval& other) const
    {
        return other.order_ >= order_ && (other.index_ >> (other.order_ - order_)) == index_;
    }

    /// The unique order-m interval containing this one; m <= order().
    [[nodiscard]] DyadicInterval ancestor(int m) const
    {
        detail::require<InvalidArgument>(m >= 0 && m <= order_, "ancestor order must lie in [0, order]");
        return {m, index_ >> (order_ - m)};
    }

    /// Range of order-n indices [first, last) of the descendants at order n >= order().
    [[nodiscard]] std::pair<std::uint64_t, std::uint64_t> descendant_range(int n) const
    {
        detail::require<InvalidArgument>(n >= order_ && n <= kMaxOrder, "descendant order must be >= order");
        const int shift = n - order_;
        return {index_ << shift, (index_ + 1) << shift};
    }

    friend auto operator<=>(const DyadicInterval&, const DyadicInterval&) = default;
    friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;

private:
    int order_ = 0;
    std::uint64_t index_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const DyadicInterval& d)
{
    return os << "I(" << d.order() << "," << d.index() << ")";
}

/// [q 2^{-alpha n}, (q+1) 2^{-alpha n}] for Hurst index alpha.
class ValueInterval {
public:
    ValueInterval(int order, std::int64_t index, double hurst) : order_(order), index_(index), hurst_(hurst)
    {
        detail::require<InvalidArgument>(order >= 0, "value interval order must be non-negative");
        detail::require<InvalidArgument>(hurst > 0.0 && hurst < 1.0, "hurst index must lie in (0,1)");
    }

    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] std::int64_t index() const { return index_; }
    [[nodiscard]] double hurst() const { return hurst_; }
    [[nodiscard]] double width() const { return width(order_, hurst_); }
    [[nodiscard]] double left() const { return static_cast<double>(index_) * width(); }
    [[nodiscard]] double right() const { return static_cast<double>(index_ + 1) * width(); }

    /// Closed-interval intersection with [lo, hi].
    [[nodiscard]] bool meets(double lo, double hi) const { return left() <= hi && right() >= lo; }

    /// Half-open membership y in [left, right); exactly one q per order contains y.
    [[nodiscard]] bool holds(double y) const { return index_of(y, order_, hurst_) == index_; }

    static double width(int order, double hurst) { return std::exp2(-hurst * order); }

    static std::int64_t index_of(double y, int order, double hurst)
    {
        return static_cast<std::int64_t>(std::floor(y / width(order, hurst)));
    }

    /// Indices q whose closed J_{n,q} meets [lo, hi].
    static std::pair<std::int64_t, std::int64_t> closed_index_range(double lo, double hi, int order, double hurst)
    {
        const double w = width(order, hurst);
        auto first = static_cast<std::int64_t>(std::ceil(lo / w)) - 1;
        auto last = static_cast<std::int64_t>(std::floor(hi / w));
        // Guard against division rounding at exact multiples.
        if (static_cast<double>(first + 1) * w < lo) ++first;
        if (static_cast<double>(last) * w > hi) --last;
        return {first, last};
    }

private:
    int order_;
    std::int64_t index_;
    double hurst_;
};

/// Finite set of dyadic intervals kept sorted by (order, index) without duplicates.
class IntervalFamily {
public:
    using const_iterator = std::vector<DyadicInterval>::const_iterator;

    IntervalFamily() = default;

    explicit IntervalFamily(std::vector<DyadicInterval> members) : members_(std::move(members)) { normalize(); }

    IntervalFamily(std::initializer_list<DyadicInterval> members) : members_(members) { normalize(); }

    /// All 2^n intervals of order n.
    static IntervalFamily full(int order)
    {
        detail::require<ResourceError>(order >= 0 && order <= 26, "full family limited to order 26");
        std::vector<DyadicInterval> v;
        v.reserve(std::size_t{1} << order);
        for (std::uint64_t p = 0; p < (std::uint64_t{1} << order); ++p) v.emplace_back(order, p);
        return IntervalFamily(std::move(v));
    }

    /// Order-n family from a list of indices.
    static IntervalFamily from_indices(int order, std::span<const std::uint64_t> indices)
    {
        std::vector<DyadicInterval> v;
        v.reserve(indices.size());
        for (auto p : indices) v.emplace_back(order, p);
        return IntervalFamily(std::move(v));
    }

    [[nodiscard]] std::size_t size() const { return members_.size(); }
    [[nodiscard]] bool empty() const { return members_.empty(); }
    [[nodiscard]] const_iterator begin() const { return members_.begin(); }
    [[nodiscard]] const_iterator end() const { return members_.end(); }
    [[nodiscard]] const std::vector<DyadicInterval>& members() const { return members_; }

    [[nodiscard]] bool contains(const DyadicInterval& d) const
    {
        return std::binary_search(members_.begin(), members_.end(), d);
    }

    void insert(const DyadicInterval& d)
    {
        auto it = std::lower_bound(members_.begin(), members_.end(), d);
        if (it == members_.end() || *it != d) members_.insert(it, d);
    }

    /// Contiguous run of members with the given order.
    [[nodiscard]] std::span<const DyadicInterval> of_order(int n) const
    {
        auto lo = std::lower_bound(members_.begin(), members_.end(), n,
                                   [](const DyadicInterval& d, int o) { return d.order() < o; });
        auto hi = std::lower_bound(lo, members_.end(), n + 1,
                                   [](const DyadicInterval& d, int o) { return d.order() < o; });
        return {lo, hi};
    }

    /// Indices of the order-n members, ascending.
    [[nodiscard]] std::vector<std::uint64_t> indices_of_order(int n) const
    {
        std::vector<std::uint64_t> out;
        for (const auto& d : of_order(n)) out.push_back(d.index());
        return out;
    }

    [[nodiscard]] std::optional<int> max_order() const
    {
        if (members_.empty()) return std::nullopt;
        return members_.back().order();
    }

    /// Distinct orders present, ascending.
    [[nodiscard]] std::vector<int> orders() const
    {
        std::vector<int> out;
        for (const auto& d : members_)
            if (out.empty() || out.back() != d.order()) out.push_back(d.order());
        return out;
    }

    friend bool operator==(const IntervalFamily&, const IntervalFamily&) = default;

private:
    void normalize()
    {
        std::sort(members_.begin(), members_.end());
        members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    }

    std::vector<DyadicInterval> members_;
};

/// N_n(U, I): order-n members of U contained in I.
inline std::uint64_t count_in(const IntervalFamily& family, const DyadicInterval& interval, int n)
{
    detail::require<InvalidArgument>(n >= interval.order(), "count_in: n must be >= order(I)");
    if (n > kMaxOrder) return 0;
    const auto run = family.of_order(n);
    const auto [first, last] = interval.descendant_range(n);
    auto lo = std::lower_bound(run.begin(), run.end(), first,
                               [](const DyadicInterval& d, std::uint64_t p) { return d.index() < p; });
    auto hi = std::lower_bound(lo, run.end(), last,
                               [](const DyadicInterval& d, std::uint64_t p) { return d.index() < p; });
    return static_cast<std::uint64_t>(hi - lo);
}

/// Largest group of ascending order-n indices sharing an order-m ancestor, and that ancestor's index.
struct WindowMax {
    std::uint64_t count = 0;
    std::uint64_t ancestor = 0;
};

inline WindowMax max_group(std::span<const std::uint64_t> sorted_indices, int shift)
{
    WindowMax best;
    std::size_t i = 0;
    while (i < sorted_indices.size()) {
        const auto a = sorted_indices[i] >> shift;
        std::size_t j = i + 1;
        while (j < sorted_indices.size() && (sorted_indices[j] >> shift) == a) ++j;
        if (j - i > best.count) best = {j - i, a};
        i = j;
    }
    return best;
}

namespace detail {

inline WindowMax max_count_at(const IntervalFamily& family, int m, int n)
{
    WindowMax best;
    std::size_t i = 0;
    const auto run = family.of_order(n);
    const int shift = n - m;
    while (i < run.size()) {
        const auto a = run[i].index() >> shift;
        std::size_t j = i + 1;
        while (j < run.size() && (run[j].index() >> shift) == a) ++j;
        if (j - i > best.count) best = {j - i, a};
        i = j;
    }
    return best;
}

inline bool window_admissible(int m, int n, double eps)
{
    return static_cast<double>(m) <= (1.0 - eps) * static_cast<double>(n);
}

} // namespace detail

/// N_{m,n}(U) = max over order-m I of N_n(U, I).
inline std::uint64_t max_count(const IntervalFamily& family, int m, int n)
{
    detail::require<InvalidArgument>(m >= 0 && m < n, "max_count: requires 0 <= m < n");
    return detail::max_count_at(family, m, n).count;
}

/// (beta, eps)-balanced: N_{m,n}(U) <= 2^{beta (n-m)} whenever m <= (1-eps) n.
/// Ties at the boundary count as balanced.
inline bool is_balanced(const IntervalFamily& family, double beta, double eps = 0.0)
{
    detail::require<InvalidArgument>(beta > 0.0, "is_balanced: beta must be positive");
    detail::require<InvalidArgument>(eps >= 0.0 && eps < 1.0, "is_balanced: eps must lie in [0,1)");
    for (int n : family.orders()) {
        for (int m = 0; m < n && detail::window_admissible(m, n, eps); ++m) {
            if (exceeds_power_of_two(detail::max_count_at(family, m, n).count, beta * (n - m))) return false;
        }
    }
    return true;
}

/// H^beta(U) = sum of diam(U)^beta.
inline double content(const IntervalFamily& family, double beta)
{
    double total = 0.0;
    for (const auto& d : family) total += std::exp2(-beta * d.order());
    return total;
}

/// One replacement of the rebalancing loop: order-n members inside I are replaced by I.
struct BalanceStep {
    int m = 0;
    int n = 0;
    std::uint64_t index = 0;
    std::uint64_t removed = 0;
};

namespace detail {

inline std::optional<BalanceStep> first_violation(const IntervalFamily& family, double beta)
{
    const auto orders = family.orders();
    if (orders.empty()) return std::nullopt;
    const int top = orders.back();
    for (int m = 0; m < top; ++m) {
        for (int n : orders) {
            if (n <= m) continue;
            const auto w = max_count_at(family, m, n);
            if (exceeds_power_of_two(w.count, beta * (n - m))) return BalanceStep{m, n, w.ancestor, w.count};
        }
    }
    return std::nullopt;
}

} // namespace detail

/// Rebalances U into a beta-balanced family V with union(U) inside union(V) and
/// H^beta(V) <= H^beta(U). Each step picks the violating pair with smallest m,
/// then smallest n, then smallest ancestor index, and replaces the order-n members
/// inside that ancestor by the ancestor itself. The optional `trace` receives the steps.
inline IntervalFamily balance(const IntervalFamily& family, double beta, std::vector<BalanceStep>* trace = nullptr)
{
    detail::require<InvalidArgument>(beta > 0.0, "balance: beta must be positive");
    std::vector<DyadicInterval> current(family.begin(), family.end());
    IntervalFamily v(std::move(current));
    while (auto step = detail::first_violation(v, beta)) {
        const DyadicInterval parent(step->m, step->index);
        std::vector<DyadicInterval> next;
        next.reserve(v.size() - step->removed + 1);
        for (const auto& d : v)
            if (!(d.order() == step->n && parent.contains(d))) next.push_back(d);
        next.push_back(parent);
        v = IntervalFamily(std::move(next));
        if (trace) trace->push_back(*step);
    }
    return v;
}

/// (members of order >= ell, members of order < ell).
inline std::pair<IntervalFamily, IntervalFamily> split_by_order(const IntervalFamily& family, int ell)
{
    std::vector<DyadicInterval> fine;
    std::vector<DyadicInterval> coarse;
    for (const auto& d : family) (d.order() >= ell ? fine : coarse).push_back(d);
    return {IntervalFamily(std::move(fine)), IntervalFamily(std::move(coarse))};
}

/// Minimal ell with H^{1/k}(members of order >= ell) < 2^{-k}.
inline int choose_tail_order(const IntervalFamily& family, int k)
{
    detail::require<InvalidArgument>(k >= 1, "choose_tail_order: k must be >= 1");
    const double bound = std::exp2(-static_cast<double>(k));
    const int top = family.max_order().value_or(-1) + 1;
    for (int ell = 0; ell <= top; ++ell) {
        if (content(split_by_order(family, ell).first, 1.0 / k) < bound) return ell;
    }
    return top;
}

// Text exchange format: one "n p" pair per line in canonical order. Blank lines and
// lines starting with '#' are ignored on input.

inline void write_family(std::ostream& os, const IntervalFamily& family)
{
    for (const auto& d : family) os << d.order() << ' ' << d.index() << '\n';
}

inline std::string to_text(const IntervalFamily& family)
{
    std::ostringstream os;
    write_family(os, family);
    return os.str();
}

inline IntervalFamily read_family(std::istream& is)
{
    std::vector<DyadicInterval> v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        long long n = -1;
        unsigned long long p = 0;
        std::string extra;
        if (!(ls >> n >> p) || (ls >> extra) || line.find('-') != std::string::npos) {
            throw ParseError("interval family line " + std::to_string(lineno) + ": expected 'n p', got '" + line +
                             "'");
        }
        if (n < 0 || n > kMaxOrder) {
            throw ResourceError("interval family line " + std::to_string(lineno) + ": order outside [0, 60]");
        }
        v.emplace_back(static_cast<int>(n), static_cast<std::uint64_t>(p));
    }
    return IntervalFamily(std::move(v));
}

inline IntervalFamily family_from_text(const std::string& text)
{
    std::istringstream is(text);
    return read_family(is);
}

} // namespace dimlab
