#pragma once

// Digit-restriction sets D_S = { sum x_n 2^-n : x_n in {0,1} if n in S, x_n = 0 otherwise }
// for finitely described S, their digit densities, exact dimension formulas and
// the dense-window search.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dimlab/dimension_report.hpp"
#include "dimlab/dyadic.hpp"
#include "dimlab/error.hpp"
#include "dimlab/numeric.hpp"

namespace dimlab {

/// Beyond the prefix, position n belongs to S iff pattern[(n - n0 - 1) mod len] is set.
struct PeriodicTail {
    std::vector<bool> pattern;
};

enum class BlockGrowth {
    /// b_k = ceil(theta a_k), a_{k+1} = ceil(rho b_k).
    geometric,
    /// b_k = ceil(theta a_k), b_{k+1} = b_k^2, a_{k+1} = ceil(b_{k+1} / theta).
    squared,
};

/// Beyond the prefix, S is the union of the blocks (a_k, b_k].
struct BlockTail {
    std::int64_t first_start = 1;
    Fraction theta{2};
    Fraction rho{1};
    BlockGrowth growth = BlockGrowth::geometric;
};

class DigitSetSpec {
public:
    using Tail = std::variant<PeriodicTail, BlockTail>;

    /// Positions beyond which block lists are not materialized.
    static constexpr std::int64_t kBlockLimit = std::int64_t{1} << 61;

    DigitSetSpec(std::vector<bool> prefix, Tail tail) : prefix_(std::move(prefix)), tail_(std::move(tail))
    {
        if (auto* p = std::get_if<PeriodicTail>(&tail_)) {
            detail::require<InvalidArgument>(!p->pattern.empty(), "periodic tail needs a non-empty pattern");
            period_ones_ = std::count(p->pattern.begin(), p->pattern.end(), true);
            pattern_prefix_.assign(p->pattern.size() + 1, 0);
            for (std::size_t i = 0; i < p->pattern.size(); ++i)
                pattern_prefix_[i + 1] = pattern_prefix_[i] + (p->pattern[i] ? 1 : 0);
        } else {
            build_blocks(std::get<BlockTail>(tail_));
        }
        prefix_count_.assign(prefix_.size() + 1, 0);
        for (std::size_t i = 0; i < prefix_.size(); ++i) prefix_count_[i + 1] = prefix_count_[i] + (prefix_[i] ? 1 : 0);
    }

    static DigitSetSpec periodic(const std::string& pattern, const std::string& prefix = "")
    {
        return {bits(prefix), PeriodicTail{bits(pattern)}};
    }

    static DigitSetSpec blocks(BlockTail tail, const std::string& prefix = "") { return {bits(prefix), tail}; }

    /// S = {} (D_S = {0}).
    static DigitSetSpec empty() { return periodic("0"); }

    [[nodiscard]] std::int64_t prefix_length() const { return static_cast<std::int64_t>(prefix_.size()); }
    [[nodiscard]] const Tail& tail() const { return tail_; }
    [[nodiscard]] const std::vector<bool>& prefix() const { return prefix_; }
    [[nodiscard]] const std::vector<std::pair<std::int64_t, std::int64_t>>& block_list() const { return blocks_; }

    /// n in S, for n >= 1.
    [[nodiscard]] bool contains(std::int64_t n) const
    {
        if (n < 1) return false;
        if (n <= prefix_length()) return prefix_[static_cast<std::size_t>(n - 1)];
        if (auto* p = std::get_if<PeriodicTail>(&tail_)) {
            const auto len = static_cast<std::int64_t>(p->pattern.size());
            return p->pattern[static_cast<std::size_t>((n - prefix_length() - 1) % len)];
        }
        detail::require<ResourceError>(n <= kBlockLimit, "digit position beyond block table");
        auto it = std::lower_bound(blocks_.begin(), blocks_.end(), n,
                                   [](const auto& blk, std::int64_t v) { return blk.second < v; });
        return it != blocks_.end() && it->first < n;
    }

    /// |S cap {1..n}|.
    [[nodiscard]] std::int64_t count_upto(std::int64_t n) const
    {
        if (n <= 0) return 0;
        const auto n0 = prefix_length();
        if (n <= n0) return prefix_count_[static_cast<std::size_t>(n)];
        std::int64_t total = prefix_count_.back();
        if (auto* p = std::get_if<PeriodicTail>(&tail_)) {
            const auto len = static_cast<std::int64_t>(p->pattern.size());
            const auto span = n - n0;
            total += (span / len) * period_ones_ + pattern_prefix_[static_cast<std::size_t>(span % len)];
            return total;
        }
        detail::require<ResourceError>(n <= kBlockLimit, "digit position beyond block table");
        return total + block_count_upto(n) - block_count_upto(n0);
    }

    /// |S cap {m+1..n}|.
    [[nodiscard]] std::int64_t count(std::int64_t m, std::int64_t n) const { return count_upto(n) - count_upto(m); }

    /// S cap {m+1..n}, ascending.
    [[nodiscard]] std::vector<std::int64_t> positions(std::int64_t m, std::int64_t n) const
    {
        std::vector<std::int64_t> out;
        for (auto i = m + 1; i <= n; ++i)
            if (contains(i)) out.push_back(i);
        return out;
    }

private:
    static std::vector<bool> bits(const std::string& s)
    {
        std::vector<bool> out;
        for (char c : s) {
            detail::require<ParseError>(c == '0' || c == '1', "bitstring may contain only 0 and 1: '" + s + "'");
            out.push_back(c == '1');
        }
        return out;
    }

    static std::int64_t ceil_mul(std::int64_t a, const Fraction& f)
    {
        const __int128 prod = static_cast<__int128>(a) * f.num;
        __int128 q = prod / f.den;
        if (q * f.den < prod) ++q;
        return q > kBlockLimit ? kBlockLimit + 1 : static_cast<std::int64_t>(q);
    }

    void build_blocks(const BlockTail& t)
    {
        detail::require<InvalidArgument>(t.first_start >= 0, "block start must be non-negative");
        detail::require<InvalidArgument>(Fraction(1) < t.theta, "block theta must exceed 1");
        detail::require<InvalidArgument>(!(t.rho < Fraction(1)), "block rho must be >= 1");
        std::int64_t a = t.first_start;
        std::int64_t b = std::max(ceil_mul(a, t.theta), a + 1);
        while (a <= kBlockLimit) {
            blocks_.emplace_back(a, std::min(b, kBlockLimit + 1));
            if (b > kBlockLimit) break;
            if (t.growth == BlockGrowth::geometric) {
                a = std::max(ceil_mul(b, t.rho), b);
                b = std::max(ceil_mul(a, t.theta), a + 1);
            } else {
                const __int128 sq = static_cast<__int128>(b) * b;
                if (sq > kBlockLimit) break;
                const auto nb = static_cast<std::int64_t>(sq);
                const Fraction inv(t.theta.den, t.theta.num);
                a = std::max(ceil_mul(nb, inv), b);
                b = nb;
            }
        }
        // Merge touching blocks so that lookups see disjoint runs.
        std::vector<std::pair<std::int64_t, std::int64_t>> merged;
        for (const auto& blk : blocks_) {
            if (!merged.empty() && blk.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, blk.second);
            else
                merged.push_back(blk);
        }
        blocks_ = std::move(merged);
        block_prefix_.assign(blocks_.size() + 1, 0);
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            block_prefix_[i + 1] = block_prefix_[i] + (blocks_[i].second - blocks_[i].first);
    }

    // Block members in {1..n}, ignoring the prefix.
    [[nodiscard]] std::int64_t block_count_upto(std::int64_t n) const
    {
        auto it = std::lower_bound(blocks_.begin(), blocks_.end(), n,
                                   [](const auto& blk, std::int64_t v) { return blk.second < v; });
        const auto k = static_cast<std::size_t>(it - blocks_.begin());
        std::int64_t total = block_prefix_[k];
        if (it != blocks_.end() && it->first < n) total += n - it->first;
        return total;
    }

    std::vector<bool> prefix_;
    Tail tail_;
    std::vector<std::int64_t> prefix_count_;
    std::int64_t period_ones_ = 0;
    std::vector<std::int64_t> pattern_prefix_;
    std::vector<std::pair<std::int64_t, std::int64_t>> blocks_;
    std::vector<std::int64_t> block_prefix_;
};

/// d_{m,n}(S) = |S cap {m+1..n}| / (n - m), exact.
inline Fraction density(const DigitSetSpec& spec, std::int64_t m, std::int64_t n)
{
    detail::require<InvalidArgument>(m >= 0 && m < n, "density: requires 0 <= m < n");
    return {spec.count(m, n), n - m};
}

inline constexpr int kMaxCoverBits = 24;

/// Order-n indices of the cylinder set: free bits at positions in S cap {1..n}, zeros elsewhere.
inline std::vector<std::uint64_t> cylinder_indices(const DigitSetSpec& spec, int n, std::int64_t from = 0)
{
    detail::require<InvalidArgument>(n >= 0 && n <= kMaxOrder, "cover order outside [0, 60]");
    const auto free = spec.positions(from, n);
    detail::require<ResourceError>(free.size() <= static_cast<std::size_t>(kMaxCoverBits),
                                   "cover size 2^" + std::to_string(free.size()) + " exceeds the bound 2^" +
                                       std::to_string(kMaxCoverBits));
    std::vector<std::uint64_t> out;
    out.reserve(std::size_t{1} << free.size());
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free.size()); ++mask) {
        std::uint64_t p = 0;
        for (std::size_t b = 0; b < free.size(); ++b)
            if ((mask >> b) & 1u) p |= std::uint64_t{1} << (n - free[b]);
        out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Order-n dyadic intervals meeting D_S. With `boundary_neighbors`, the left
/// neighbour of each cylinder is added as well, since the cylinder's left endpoint
/// is a point of D_S shared by both intervals.
inline IntervalFamily cover(const DigitSetSpec& spec, int n, bool boundary_neighbors = false)
{
    auto idx = cylinder_indices(spec, n);
    if (boundary_neighbors) {
        const auto base = idx.size();
        for (std::size_t i = 0; i < base; ++i)
            if (idx[i] > 0) idx.push_back(idx[i] - 1);
    }
    return IntervalFamily::from_indices(n, idx);
}

/// d_n and windowed maxima max_{0 <= m <= (1-eps) n} d_{m,n} for each eps of a grid.
struct DensityProfile {
    std::int64_t n_max = 0;
    std::vector<double> eps_grid;
    /// d[n-1] = d_n.
    std::vector<double> d;
    /// max_window[j][n-1] for eps_grid[j].
    std::vector<std::vector<double>> max_window;

    /// Default grid eps = 2^-j, 1 <= j <= 10.
    static std::vector<double> default_grid()
    {
        std::vector<double> g;
        for (int j = 1; j <= 10; ++j) g.push_back(std::exp2(-j));
        return g;
    }

    static DensityProfile compute(const DigitSetSpec& spec, std::int64_t n_max,
                                  std::vector<double> grid = default_grid())
    {
        detail::require<InvalidArgument>(n_max >= 1 && n_max <= 1'000'000, "density profile: n_max in [1, 1e6]");
        DensityProfile p;
        p.n_max = n_max;
        p.eps_grid = std::move(grid);
        std::vector<std::int64_t> cum(static_cast<std::size_t>(n_max) + 1, 0);
        for (std::int64_t i = 1; i <= n_max; ++i) cum[i] = cum[i - 1] + (spec.contains(i) ? 1 : 0);
        p.d.resize(static_cast<std::size_t>(n_max));
        p.max_window.assign(p.eps_grid.size(), std::vector<double>(static_cast<std::size_t>(n_max), 0.0));
        // Thresholds m <= (1-eps) n, visited in increasing order of m.
        std::vector<std::size_t> order(p.eps_grid.size());
        for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return p.eps_grid[a] > p.eps_grid[b]; });
        std::vector<std::int64_t> limit(p.eps_grid.size());
        for (std::int64_t n = 1; n <= n_max; ++n) {
            p.d[n - 1] = static_cast<double>(cum[n]) / static_cast<double>(n);
            for (std::size_t j = 0; j < limit.size(); ++j)
                limit[j] = static_cast<std::int64_t>(std::floor((1.0 - p.eps_grid[j]) * static_cast<double>(n)));
            double running = 0.0;
            std::size_t next = 0;
            for (std::int64_t m = 0; m < n && next < order.size(); ++m) {
                while (next < order.size() && limit[order[next]] < m) {
                    p.max_window[order[next]][n - 1] = running;
                    ++next;
                }
                if (next == order.size()) break;
                running = std::max(running, static_cast<double>(cum[n] - cum[m]) / static_cast<double>(n - m));
            }
            for (; next < order.size(); ++next) p.max_window[order[next]][n - 1] = running;
        }
        return p;
    }

    /// CSV with columns n, d_n, maxwin_eps=<eps>...
    void write_csv(std::ostream& os) const
    {
        os << "n,d_n";
        for (double e : eps_grid) os << ",maxwin_eps=" << e;
        os << '\n';
        for (std::int64_t n = 1; n <= n_max; ++n) {
            os << n << ',' << d[n - 1];
            for (const auto& col : max_window) os << ',' << col[n - 1];
            os << '\n';
        }
    }
};

/// Exact Hausdorff, packing, modified Assouad and Assouad dimensions of D_S.
///   periodic pattern: every dimension equals the pattern density;
///   geometric blocks with ratio theta and gap ratio rho:
///     liminf d_n = (theta-1)/(rho theta - 1), limsup d_n = rho (theta-1)/(rho theta - 1),
///     and windows of density one of unbounded length give 1 for both Assouad-type values;
///   squared blocks: (0, 1 - 1/theta, 1, 1).
/// The Assouad value is the long-window limit lim_L sup_{n-m >= L} d_{m,n}.
inline DimensionReport exact_dims(const DigitSetSpec& spec)
{
    auto exact = [](double v) { return DimensionValue{v, Method::exact, 0.0}; };
    DimensionReport r;
    if (auto* p = std::get_if<PeriodicTail>(&spec.tail())) {
        const double ones = static_cast<double>(std::count(p->pattern.begin(), p->pattern.end(), true));
        const double dens = ones / static_cast<double>(p->pattern.size());
        r.hausdorff = r.packing = r.modified_assouad = r.assouad = exact(dens);
        return r;
    }
    const auto& b = std::get<BlockTail>(spec.tail());
    const double theta = b.theta.value();
    const double rho = b.rho.value();
    if (b.growth == BlockGrowth::geometric) {
        const double denom = rho * theta - 1.0;
        r.hausdorff = exact((theta - 1.0) / denom);
        r.packing = exact(rho * (theta - 1.0) / denom);
    } else {
        r.hausdorff = exact(0.0);
        r.packing = exact(1.0 - 1.0 / theta);
    }
    r.modified_assouad = exact(1.0);
    r.assouad = exact(1.0);
    return r;
}

/// (m, n, I) with N_n(D_S, I) >= 2^{(alpha+eps)(n-m)}, I of order m meeting D_S.
struct DenseWindow {
    int m = 0;
    int n = 0;
    DyadicInterval interval;
    /// N_n(D_S, I) = 2^{|S cap (m,n]|}; stored as the exponent.
    std::int64_t log2_population = 0;
};

struct DenseWindowOptions {
    /// Windows start at m >= m_min.
    int m_min = 0;
    /// Windows shorter than this are ignored (length-one windows are always dense for infinite S).
    int min_len = 4;
};

/// Searches windows with m <= (1-eps) n, n <= n_max, preferring the largest n and
/// then the longest window. The hit is refined by halving [m, n] and keeping a half
/// that is still dense and admissible, until no half qualifies.
inline std::optional<DenseWindow> find_dense_window(const DigitSetSpec& spec, double alpha, double eps, int n_max,
                                                    DenseWindowOptions opt = {})
{
    detail::require<InvalidArgument>(alpha > 0.0 && alpha < 1.0, "find_dense_window: alpha must lie in (0,1)");
    detail::require<InvalidArgument>(eps > 0.0 && eps < 1.0, "find_dense_window: eps must lie in (0,1)");
    detail::require<InvalidArgument>(n_max <= kMaxOrder, "find_dense_window: n_max above order cap");
    const double rate = alpha + eps;
    auto dense = [&](int m, int n) {
        return static_cast<double>(spec.count(m, n)) >= rate * static_cast<double>(n - m);
    };
    auto admissible = [&](int m, int n) {
        return m >= opt.m_min && n - m >= opt.min_len && detail::window_admissible(m, n, eps);
    };
    for (int n = n_max; n > opt.m_min; --n) {
        for (int m = opt.m_min; m < n; ++m) {
            if (!admissible(m, n) || !dense(m, n)) continue;
            int lo = m;
            int hi = n;
            for (;;) {
                const int mid = lo + (hi - lo) / 2;
                if (mid <= lo || mid >= hi) break;
                // The right half keeps n and pushes m toward (1-eps) n.
                if (admissible(mid, hi) && dense(mid, hi))
                    lo = mid;
                else if (admissible(lo, mid) && dense(lo, mid))
                    hi = mid;
                else
                    break;
            }
            return DenseWindow{lo, hi, DyadicInterval(lo, 0), spec.count(lo, hi)};
        }
    }
    return std::nullopt;
}

// Structured config: {"prefix": "0110", "tail": {"kind": "periodic", "pattern": "10"}}
// or {"tail": {"kind": "blocks", "start": 2, "theta": "2", "rho": "3/2", "mode": "geometric"|"squared"}}.

inline Fraction fraction_from_json(const nlohmann::json& j)
{
    if (j.is_number_integer()) return {j.get<std::int64_t>()};
    if (j.is_string()) return parse_fraction(j.get<std::string>());
    throw ParseError("expected an integer or a rational string, got " + j.dump());
}

inline DigitSetSpec digit_set_from_json(const nlohmann::json& j)
{
    try {
        const auto prefix = j.value("prefix", std::string{});
        const auto& tail = j.at("tail");
        const auto kind = tail.at("kind").get<std::string>();
        if (kind == "periodic") return DigitSetSpec::periodic(tail.at("pattern").get<std::string>(), prefix);
        if (kind == "blocks") {
            BlockTail b;
            b.first_start = tail.value("start", std::int64_t{1});
            b.theta = tail.contains("theta") ? fraction_from_json(tail.at("theta")) : Fraction(2);
            b.rho = tail.contains("rho") ? fraction_from_json(tail.at("rho")) : Fraction(1);
            const auto mode = tail.value("mode", std::string{"geometric"});
            if (mode == "geometric")
                b.growth = BlockGrowth::geometric;
            else if (mode == "squared")
                b.growth = BlockGrowth::squared;
            else
                throw ParseError("unknown block mode '" + mode + "'");
            return DigitSetSpec::blocks(b, prefix);
        }
        throw UnsupportedSpec("unknown digit set tail kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("digit set config: ") + e.what());
    }
}

} // namespace dimlab
