#pragma once

// Box-counting and windowed Assouad-type estimators over per-order covers, and the
// merge of exact values with estimates into a DimensionReport.
//
// Countable stabilization cannot be realized numerically: the estimators target
// lower/upper Minkowski and quasi-Assouad exponents. Estimated packing and modified
// Assouad values in a report are therefore upper bounds in spirit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "dimlab/dimension_report.hpp"
#include "dimlab/dyadic.hpp"
#include "dimlab/error.hpp"
#include "dimlab/numeric.hpp"

namespace dimlab {

/// One order-n cover per order n in [first_order, last_order].
class CoverHierarchy {
public:
    CoverHierarchy(int first_order, std::vector<IntervalFamily> covers, bool refined)
        : first_(first_order), covers_(std::move(covers)), refined_(refined)
    {
        detail::require<InvalidArgument>(first_ >= 0, "cover hierarchy: negative first order");
        detail::require<InvalidArgument>(!covers_.empty(), "cover hierarchy: no covers");
        indices_.reserve(covers_.size());
        for (std::size_t i = 0; i < covers_.size(); ++i) {
            const int n = first_ + static_cast<int>(i);
            for (const auto& d : covers_[i])
                detail::require<InvalidArgument>(d.order() == n, "cover hierarchy: member of wrong order at level " +
                                                                     std::to_string(n));
            indices_.push_back(covers_[i].indices_of_order(n));
        }
        if (refined_) {
            for (std::size_t i = 1; i < covers_.size(); ++i) {
                const auto& parents = indices_[i - 1];
                for (auto p : indices_[i])
                    detail::require<InvalidArgument>(std::binary_search(parents.begin(), parents.end(), p >> 1),
                                                     "cover hierarchy flagged as refined has an orphan at order " +
                                                         std::to_string(first_ + static_cast<int>(i)));
            }
        }
    }

    /// Builds covers from `make(n)` for n in [lo, hi].
    template <class F>
    static CoverHierarchy build(int lo, int hi, F&& make, bool refined)
    {
        detail::require<InvalidArgument>(lo <= hi, "cover hierarchy: empty order range");
        std::vector<IntervalFamily> covers;
        for (int n = lo; n <= hi; ++n) covers.push_back(make(n));
        return {lo, std::move(covers), refined};
    }

    /// Ancestor closure of an order-`top` family for orders [lo, top].
    static CoverHierarchy from_finest(const IntervalFamily& finest, int lo, int top)
    {
        std::vector<IntervalFamily> covers;
        for (int n = lo; n <= top; ++n) {
            std::vector<std::uint64_t> idx;
            for (const auto& d : finest.of_order(top)) idx.push_back(d.index() >> (top - n));
            idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
            covers.push_back(IntervalFamily::from_indices(n, idx));
        }
        return {lo, std::move(covers), true};
    }

    [[nodiscard]] int first_order() const { return first_; }
    [[nodiscard]] int last_order() const { return first_ + static_cast<int>(covers_.size()) - 1; }
    [[nodiscard]] bool refined() const { return refined_; }

    [[nodiscard]] const IntervalFamily& at(int n) const { return covers_.at(slot(n)); }
    [[nodiscard]] const std::vector<std::uint64_t>& indices(int n) const { return indices_.at(slot(n)); }
    [[nodiscard]] std::uint64_t size_at(int n) const { return indices(n).size(); }

private:
    [[nodiscard]] std::size_t slot(int n) const
    {
        detail::require<InvalidArgument>(n >= first_ && n <= last_order(), "order outside cover hierarchy range");
        return static_cast<std::size_t>(n - first_);
    }

    int first_;
    std::vector<IntervalFamily> covers_;
    std::vector<std::vector<std::uint64_t>> indices_;
    bool refined_;
};

struct MinkowskiEstimate {
    /// min over the window of log2|cover(n)| / n.
    double lower = 0.0;
    /// max over the window of log2|cover(n)| / n.
    double upper = 0.0;
    /// least-squares slope of log2|cover(n)| against n.
    double slope = 0.0;
    /// standard error of the slope.
    double uncertainty = 0.0;
};

inline MinkowskiEstimate minkowski_slopes(const CoverHierarchy& h, int n_lo, int n_hi)
{
    detail::require<InvalidArgument>(n_lo >= h.first_order() && n_hi <= h.last_order(),
                                     "minkowski_slopes: window outside hierarchy range");
    detail::require<InvalidArgument>(n_hi - n_lo >= 4, "minkowski_slopes: window must span at least 4 orders");
    detail::require<InvalidArgument>(n_lo >= 1, "minkowski_slopes: orders must be positive");
    std::vector<double> x;
    std::vector<std::uint64_t> counts;
    MinkowskiEstimate est;
    est.lower = std::numeric_limits<double>::infinity();
    est.upper = -std::numeric_limits<double>::infinity();
    for (int n = n_lo; n <= n_hi; ++n) {
        const auto c = h.size_at(n);
        detail::require<InvalidArgument>(c > 0, "minkowski_slopes: empty cover at order " + std::to_string(n));
        const double r = std::log2(static_cast<double>(c)) / n;
        est.lower = std::min(est.lower, r);
        est.upper = std::max(est.upper, r);
        x.push_back(n);
        counts.push_back(c);
    }
    const auto fit = log2_slope(x, counts);
    est.slope = fit.slope;
    est.uncertainty = fit.slope_stderr;
    return est;
}

/// max over m < n in range with m <= (1-eps) n and n - m >= min_len, and over order-m
/// intervals I, of log2 N_n(cover(n), I) / (n - m). NaN when no window is admissible.
inline double window_assouad(const CoverHierarchy& h, double eps, int min_len = 8)
{
    detail::require<InvalidArgument>(h.refined(), "window_assouad: hierarchy must be refinement-flagged");
    detail::require<InvalidArgument>(eps >= 0.0 && eps < 1.0, "window_assouad: eps must lie in [0,1)");
    double best = std::numeric_limits<double>::quiet_NaN();
    for (int n = h.first_order(); n <= h.last_order(); ++n) {
        const auto& idx = h.indices(n);
        if (idx.empty()) continue;
        for (int m = h.first_order(); m < n; ++m) {
            if (n - m < min_len || !detail::window_admissible(m, n, eps)) continue;
            const auto w = max_group(idx, n - m);
            const double v = std::log2(static_cast<double>(w.count)) / (n - m);
            if (std::isnan(best) || v > best) best = v;
        }
    }
    return best;
}

struct DimensionEstimates {
    std::optional<MinkowskiEstimate> minkowski;
    std::optional<DimensionValue> quasi_assouad;
    std::optional<DimensionValue> assouad;
};

/// Merges exact values with estimates. Estimates map as lower Minkowski -> hausdorff,
/// upper Minkowski -> packing, quasi-Assouad -> modified Assouad. Throws
/// ValidationError when an exact value and an estimate of the same quantity differ by
/// more than the estimate's uncertainty plus `tolerance`, or when the merged report
/// breaks the chain inequality beyond the reported uncertainties.
inline DimensionReport report(const std::optional<DimensionReport>& exact, const DimensionEstimates& est,
                              double tolerance = 0.0)
{
    DimensionReport out;
    if (exact) out = *exact;
    auto merge = [&](DimensionValue& slot, const std::optional<DimensionValue>& e, const char* name) {
        if (!e) return;
        if (slot.present() && slot.method == Method::exact) {
            if (std::abs(slot.value - e->value) > e->uncertainty + tolerance)
                throw ValidationError(std::string("exact ") + name + " " + std::to_string(slot.value) +
                                      " conflicts with estimate " + std::to_string(e->value) + " +- " +
                                      std::to_string(e->uncertainty));
            return;
        }
        slot = *e;
        slot.method = Method::estimated;
    };
    if (est.minkowski) {
        merge(out.hausdorff, DimensionValue{est.minkowski->lower, Method::estimated, est.minkowski->uncertainty},
              "hausdorff");
        merge(out.packing, DimensionValue{est.minkowski->upper, Method::estimated, est.minkowski->uncertainty},
              "packing");
    }
    merge(out.modified_assouad, est.quasi_assouad, "modified_assouad");
    merge(out.assouad, est.assouad, "assouad");
    if (auto bad = out.chain_violation(tolerance)) throw ValidationError("chain inequality violated: " + *bad);
    return out;
}

} // namespace dimlab
