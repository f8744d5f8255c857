#pragma once

// Iterated function systems of contracting similarities of [0,1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dimlab/dyadic.hpp"
#include "dimlab/error.hpp"

namespace dimlab {

/// x -> ratio * x + shift. Negative ratios reverse orientation.
struct Similarity {
    double ratio = 0.5;
    double shift = 0.0;

    [[nodiscard]] double operator()(double x) const { return ratio * x + shift; }

    /// Image of [lo, hi] as an ordered pair.
    [[nodiscard]] std::pair<double, double> image(double lo, double hi) const
    {
        const double a = (*this)(lo);
        const double b = (*this)(hi);
        return {std::min(a, b), std::max(a, b)};
    }
};

class Ifs {
public:
    explicit Ifs(std::vector<Similarity> maps) : maps_(std::move(maps))
    {
        detail::require<InvalidArgument>(!maps_.empty(), "IFS needs at least one map");
        constexpr double slack = 1e-12;
        for (const auto& f : maps_) {
            detail::require<InvalidArgument>(f.ratio != 0.0 && std::abs(f.ratio) < 1.0,
                                             "IFS ratio must satisfy 0 < |r| < 1");
            const auto [lo, hi] = f.image(0.0, 1.0);
            detail::require<InvalidArgument>(lo >= -slack && hi <= 1.0 + slack, "IFS map does not send [0,1] into itself");
        }
    }

    [[nodiscard]] const std::vector<Similarity>& maps() const { return maps_; }
    [[nodiscard]] std::size_t size() const { return maps_.size(); }

private:
    std::vector<Similarity> maps_;
};

struct SimilarityDimension {
    /// Root s of sum |r_i|^s = 1.
    double raw = 0.0;
    /// min(raw, 1): the attractor is a subset of the line.
    double capped = 0.0;
    bool was_capped = false;
};

inline SimilarityDimension similarity_dimension(const Ifs& ifs, double tol = 1e-12)
{
    SimilarityDimension out;
    if (ifs.size() == 1) return out;
    auto excess = [&](double s) {
        double total = -1.0;
        for (const auto& f : ifs.maps()) total += std::pow(std::abs(f.ratio), s);
        return total;
    };
    double lo = 0.0;
    double hi = 1.0;
    while (excess(hi) > 0.0) hi *= 2.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    out.raw = 0.5 * (lo + hi);
    out.capped = std::min(out.raw, 1.0);
    out.was_capped = out.raw > 1.0;
    return out;
}

inline constexpr std::size_t kMaxCylinders = std::size_t{1} << 24;

/// Order-n dyadic intervals meeting the attractor. Cylinders F_{i1} o ... o F_{ij}([0,1])
/// are expanded breadth-first until their diameter drops below 2^-n and then
/// rasterized with closed intersection, so a cylinder may add one extra interval at
/// each end when it touches a grid point.
inline IntervalFamily attractor_cover(const Ifs& ifs, int n)
{
    detail::require<InvalidArgument>(n >= 0 && n <= 40, "attractor_cover: order outside [0, 40]");
    const double cell = std::ldexp(1.0, -n);
    const auto cells = std::uint64_t{1} << n;
    // A cylinder F_w([0,1]) is held as the affine map x -> scale x + offset of F_w;
    // its children are F_w o F_i.
    std::vector<std::pair<double, double>> frontier{{1.0, 0.0}};
    std::vector<std::uint64_t> hits;
    while (!frontier.empty()) {
        std::vector<std::pair<double, double>> next;
        for (const auto& [scale, offset] : frontier) {
            const double lo = std::min(offset, offset + scale);
            const double hi = std::max(offset, offset + scale);
            if (hi - lo < cell) {
                // Endpoints within rounding of a grid point touch both neighbouring cells.
                const double slack = 1e-9 * cell;
                auto first = static_cast<std::uint64_t>(std::max(0.0, std::floor((lo - slack) / cell)));
                auto last = static_cast<std::uint64_t>(std::max(0.0, std::floor((hi + slack) / cell)));
                last = std::min(last, cells - 1);
                for (auto p = first; p <= last; ++p) hits.push_back(p);
                continue;
            }
            for (const auto& f : ifs.maps()) next.emplace_back(scale * f.ratio, scale * f.shift + offset);
            detail::require<ResourceError>(next.size() <= kMaxCylinders,
                                           "attractor_cover: cylinder count exceeds the bound 2^24");
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        detail::require<ResourceError>(next.size() <= kMaxCylinders && hits.size() <= kMaxCylinders,
                                       "attractor_cover: cylinder count exceeds the bound 2^24");
        frontier = std::move(next);
    }
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
    return IntervalFamily::from_indices(n, hits);
}

/// True iff the open images F_i((0,1)) are pairwise disjoint (touching endpoints allowed).
inline bool check_disjoint_images(const Ifs& ifs)
{
    std::vector<std::pair<double, double>> images;
    for (const auto& f : ifs.maps()) images.push_back(f.image(0.0, 1.0));
    std::sort(images.begin(), images.end());
    for (std::size_t i = 1; i < images.size(); ++i)
        if (images[i].first < images[i - 1].second - 1e-12) return false;
    return true;
}

/// Parses [[r, t], ...].
inline Ifs ifs_from_json(const nlohmann::json& j)
{
    if (!j.is_array()) throw ParseError("IFS config must be a list of [ratio, shift] pairs");
    std::vector<Similarity> maps;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw ParseError("IFS entry must be [ratio, shift], got " + e.dump());
        maps.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    return Ifs(std::move(maps));
}

} // namespace dimlab
