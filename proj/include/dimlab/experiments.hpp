#pragma once

// Named experiments: each runs a seeded ensemble, checks its assertions at the
// configured tolerances and returns CSV tables plus a pass/fail summary.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dimlab/digit_set.hpp"
#include "dimlab/dyadic.hpp"
#include "dimlab/error.hpp"
#include "dimlab/estimators.hpp"
#include "dimlab/fbm.hpp"
#include "dimlab/numeric.hpp"
#include "dimlab/path_counts.hpp"
#include "dimlab/percolation.hpp"
#include "dimlab/rng.hpp"

namespace dimlab {

struct ExperimentConfig {
    std::string name;
    double alpha = 0.5;
    /// Path order (time grid 2^-order).
    int order = 16;
    /// Slope window.
    int n_lo = 8;
    int n_hi = 16;
    int ensemble = 50;
    std::uint64_t seed = 1;
    double eps = 0.2;
    double gamma = 0.5;
    int depth = 18;
    /// Digit set (see digit_set_from_json).
    nlohmann::json set;
    double tolerance = 0.1;
    /// Minimum fraction of runs that must pass, for per-run assertions.
    double pass_fraction = 0.9;
    int subfamilies = 20;
    int subblocks = 10;
    int workers = 1;
    /// tail_check parameters for percolation_dim.
    int tail_n = 12;
    int tail_trials = 2000;
    std::vector<double> tail_k{1, 2, 3, 4};
};

inline const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{"zero_set",         "record_set",      "kahane_image",
                                                "doubling",         "witness",         "mixed_level_sets",
                                                "percolation_dim", "heart_events"};
    return names;
}

/// Frozen defaults per experiment; slope windows and tolerances were fixed by pilot runs.
inline ExperimentConfig default_config(const std::string& name)
{
    ExperimentConfig c;
    c.name = name;
    const nlohmann::json periodic10 = {{"tail", {{"kind", "periodic"}, {"pattern", "10"}}}};
    if (name == "zero_set") {
        c.alpha = 0.5, c.order = 16, c.n_lo = 4, c.n_hi = 10, c.ensemble = 50, c.tolerance = 0.08;
    } else if (name == "record_set") {
        c.alpha = 0.5, c.order = 16, c.n_lo = 8, c.n_hi = 16, c.ensemble = 50, c.tolerance = 0.1;
    } else if (name == "kahane_image") {
        c.alpha = 0.75, c.order = 16, c.n_lo = 8, c.n_hi = 16, c.ensemble = 20, c.tolerance = 0.1, c.set = periodic10;
    } else if (name == "doubling") {
        c.alpha = 0.6, c.order = 22, c.n_lo = 14, c.n_hi = 22, c.ensemble = 10, c.tolerance = 0.1;
        c.pass_fraction = 0.9, c.set = periodic10;
    } else if (name == "witness") {
        c.alpha = 0.5, c.eps = 0.2, c.order = 18, c.depth = 16, c.ensemble = 50, c.tolerance = 0.2, c.pass_fraction = 0.51;
        c.set = {{"tail", {{"kind", "blocks"}, {"start", 2}, {"theta", 2}, {"rho", 1}, {"mode", "squared"}}}};
    } else if (name == "mixed_level_sets") {
        c.alpha = 0.6, c.order = 20, c.n_lo = 4, c.n_hi = 20, c.ensemble = 50, c.tolerance = 0.1, c.pass_fraction = 0.9;
        c.set = periodic10;
    } else if (name == "percolation_dim") {
        c.gamma = 0.5, c.depth = 18, c.n_lo = 10, c.n_hi = 18, c.ensemble = 200, c.eps = 0.2, c.tolerance = 0.08;
        c.pass_fraction = 0.95;
    } else if (name == "heart_events") {
        c.alpha = 0.5, c.eps = 0.2, c.order = 14, c.n_lo = 10, c.n_hi = 14, c.ensemble = 100, c.pass_fraction = 0.95;
        c.set = periodic10;
    } else {
        throw UnsupportedSpec("unknown experiment '" + name + "'");
    }
    return c;
}

/// Defaults for config["experiment"], overridden by any keys present.
inline ExperimentConfig config_from_json(const nlohmann::json& j)
{
    try {
        auto c = default_config(j.at("experiment").get<std::string>());
        auto take = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        take("alpha", c.alpha);
        take("order", c.order);
        take("n_lo", c.n_lo);
        take("n_hi", c.n_hi);
        take("ensemble", c.ensemble);
        take("seed", c.seed);
        take("eps", c.eps);
        take("gamma", c.gamma);
        take("depth", c.depth);
        take("tolerance", c.tolerance);
        take("pass_fraction", c.pass_fraction);
        take("subfamilies", c.subfamilies);
        take("subblocks", c.subblocks);
        take("workers", c.workers);
        take("tail_n", c.tail_n);
        take("tail_trials", c.tail_trials);
        take("tail_k", c.tail_k);
        if (j.contains("set")) c.set = j.at("set");
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("experiment config: ") + e.what());
    }
}

inline void validate(const ExperimentConfig& c)
{
    detail::require<InvalidArgument>(c.ensemble >= 1, "ensemble must be positive");
    detail::require<InvalidArgument>(c.workers >= 1, "workers must be positive");
    detail::require<InvalidArgument>(c.tolerance >= 0.0, "tolerance must be non-negative");
    detail::require<InvalidArgument>(c.pass_fraction >= 0.0 && c.pass_fraction <= 1.0, "pass_fraction must lie in [0,1]");
    const bool percolation = c.name == "percolation_dim";
    const int top = percolation ? c.depth : c.order;
    detail::require<InvalidArgument>(c.n_lo >= 1 && c.n_lo < c.n_hi && c.n_hi <= top,
                                     "slope window must satisfy 1 <= n_lo < n_hi <= order");
    if (!percolation) require_hurst(c.alpha);
}

/// A CSV table with preformatted cells.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write_csv(std::ostream& os) const
    {
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << '\n';
        }
    }
};

struct Assertion {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExperimentResult {
    std::string name;
    std::vector<Assertion> assertions;
    /// (file stem, table)
    std::vector<std::pair<std::string, Table>> tables;

    [[nodiscard]] bool pass() const
    {
        return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
    }

    void write_summary(std::ostream& os) const
    {
        os << "experiment " << name << '\n';
        for (const auto& a : assertions) os << (a.pass ? "PASS " : "FAIL ") << a.name << ": " << a.detail << '\n';
        os << (pass() ? "PASS" : "FAIL") << '\n';
    }
};

namespace detail {

inline std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

/// Runs f(i) for i in [0, count) on `workers` threads; results come back in index order.
template <class T, class F>
std::vector<T> parallel_map(int count, int workers, F&& f)
{
    std::vector<T> out(static_cast<std::size_t>(count));
    const int threads = std::max(1, std::min(workers, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = f(i);
        return out;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = next++; i < count; i = next++) out[static_cast<std::size_t>(i)] = f(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

inline double slope_over(const std::vector<double>& log2_counts, int n_lo, int n_hi, double x_scale = 1.0)
{
    std::vector<double> x;
    std::vector<double> y;
    for (int n = n_lo; n <= n_hi; ++n) {
        x.push_back(x_scale * n);
        y.push_back(log2_counts[static_cast<std::size_t>(n)]);
    }
    return fit_line(x, y).slope;
}

inline Assertion within(const std::string& name, double value, double target, double tol)
{
    return {name, std::abs(value - target) <= tol,
            "value " + fmt(value) + ", target " + fmt(target) + " +- " + fmt(tol)};
}

inline Assertion fraction_at_least(const std::string& name, int hits, int total, double needed)
{
    const double f = total > 0 ? static_cast<double>(hits) / total : 0.0;
    return {name, total > 0 && f >= needed,
            std::to_string(hits) + "/" + std::to_string(total) + " = " + fmt(f) + ", needed >= " + fmt(needed)};
}

/// Sorted order-n indices of the members of `cover` lying inside I_{k,p}.
inline std::vector<std::uint64_t> inside(const std::vector<std::uint64_t>& idx, int n, int k, std::uint64_t p)
{
    const auto lo = p << (n - k);
    const auto hi = (p + 1) << (n - k);
    return {std::lower_bound(idx.begin(), idx.end(), lo), std::lower_bound(idx.begin(), idx.end(), hi)};
}

/// Random subtree of the D_S cylinder tree up to order `top`: at every free digit each
/// child of a kept node is kept with probability q. Redrawn until no level is empty.
inline std::vector<std::vector<std::uint64_t>> random_subtree(const DigitSetSpec& spec, int top, double q,
                                                              RandomStream& rng)
{
    for (;;) {
        std::vector<std::vector<std::uint64_t>> levels(static_cast<std::size_t>(top) + 1);
        levels[0] = {0};
        bool alive = true;
        for (int n = 1; n <= top && alive; ++n) {
            auto& out = levels[static_cast<std::size_t>(n)];
            for (auto p : levels[static_cast<std::size_t>(n) - 1]) {
                if (!spec.contains(n)) {
                    out.push_back(2 * p);
                    continue;
                }
                for (std::uint64_t b = 0; b < 2; ++b)
                    if (rng.uniform() < q) out.push_back(2 * p + b);
            }
            alive = !out.empty();
        }
        if (alive) return levels;
    }
}

} // namespace detail

// Zero set of B: box-count slope of level_set(B, 0) against 1 - alpha.
inline ExperimentResult run_zero_or_record(const ExperimentConfig& c, bool record)
{
    const FbmSampler sampler(c.alpha, c.order);
    struct Row {
        std::uint64_t seed;
        double slope;
    };
    const auto rows = detail::parallel_map<Row>(c.ensemble, c.workers, [&](int i) {
        const auto seed = member_seed(c.seed, static_cast<std::uint64_t>(i));
        const auto path = sampler.sample(seed);
        const PathRanges ranges(path);
        std::vector<double> counts(static_cast<std::size_t>(c.n_hi) + 1, 0.0);
        for (int n = c.n_lo; n <= c.n_hi; ++n) {
            const auto size = record ? record_set(path, n).size() : level_set(ranges, 0.0, n).size();
            counts[static_cast<std::size_t>(n)] = std::log2(static_cast<double>(std::max<std::size_t>(size, 1)));
        }
        return Row{seed, detail::slope_over(counts, c.n_lo, c.n_hi)};
    });
    ExperimentResult res{c.name, {}, {}};
    Table t{{"run", "seed", "slope"}, {}};
    double mean = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        t.rows.push_back({std::to_string(i), std::to_string(rows[i].seed), detail::fmt(rows[i].slope)});
        mean += rows[i].slope / static_cast<double>(rows.size());
    }
    const double target = record ? c.alpha : 1.0 - c.alpha;
    res.assertions.push_back(detail::within(record ? "mean record-set slope" : "mean zero-set slope", mean, target, c.tolerance));
    res.tables.emplace_back(c.name, std::move(t));
    return res;
}

/// log2 of the image box counts of a nested family given per order.
inline std::vector<double> image_log_counts(const PathRanges& ranges, const std::vector<std::vector<std::uint64_t>>& levels,
                                            int n_lo, int n_hi)
{
    std::vector<double> out(static_cast<std::size_t>(n_hi) + 1, 0.0);
    for (int n = n_lo; n <= n_hi; ++n)
        out[static_cast<std::size_t>(n)] = std::log2(static_cast<double>(
            std::max<std::uint64_t>(1, image_box_count(ranges, levels[static_cast<std::size_t>(n)], n))));
    return out;
}

inline std::vector<double> size_log_counts(const std::vector<std::vector<std::uint64_t>>& levels, int n_lo, int n_hi)
{
    std::vector<double> out(static_cast<std::size_t>(n_hi) + 1, 0.0);
    for (int n = n_lo; n <= n_hi; ++n)
        out[static_cast<std::size_t>(n)] =
            std::log2(static_cast<double>(std::max<std::size_t>(1, levels[static_cast<std::size_t>(n)].size())));
    return out;
}

inline std::vector<std::vector<std::uint64_t>> cover_levels(const DigitSetSpec& spec, int top)
{
    std::vector<std::vector<std::uint64_t>> levels;
    for (int n = 0; n <= top; ++n) levels.push_back(cylinder_indices(spec, n));
    return levels;
}

// Kahane: image slope of B(A) against min(1, dim_H A / alpha).
inline ExperimentResult run_kahane_image(const ExperimentConfig& c)
{
    const auto spec = digit_set_from_json(c.set);
    const double dim = exact_dims(spec).hausdorff.value;
    const auto levels = cover_levels(spec, c.n_hi);
    const FbmSampler sampler(c.alpha, c.order);
    struct Row {
        std::uint64_t seed;
        double slope;
    };
    const auto rows = detail::parallel_map<Row>(c.ensemble, c.workers, [&](int i) {
        const auto seed = member_seed(c.seed, static_cast<std::uint64_t>(i));
        const auto path = sampler.sample(seed);
        const PathRanges ranges(path);
        return Row{seed, detail::slope_over(image_log_counts(ranges, levels, c.n_lo, c.n_hi), c.n_lo, c.n_hi, c.alpha)};
    });
    ExperimentResult res{c.name, {}, {}};
    Table t{{"run", "seed", "image_slope"}, {}};
    double mean = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        t.rows.push_back({std::to_string(i), std::to_string(rows[i].seed), detail::fmt(rows[i].slope)});
        mean += rows[i].slope / static_cast<double>(rows.size());
    }
    res.assertions.push_back(detail::within("mean image slope", mean, std::min(1.0, dim / c.alpha), c.tolerance));
    res.tables.emplace_back(c.name, std::move(t));
    return res;
}

// Uniform doubling: for sub-families and dyadic sub-blocks A of D, image slope
// against (1/alpha) slope(A), per (A, seed) pair.
inline ExperimentResult run_doubling(const ExperimentConfig& c)
{
    const auto spec = digit_set_from_json(c.set);
    const auto full = cover_levels(spec, c.n_hi);
    struct Subset {
        std::string kind;
        std::string param;
        std::vector<std::vector<std::uint64_t>> levels;
        double slope = 0.0;
    };
    std::vector<Subset> subsets;
    RandomStream rng(member_seed(c.seed, 0x5eed0000u));
    for (int i = 0; i < c.subfamilies; ++i) {
        const double q = 0.8 + 0.2 * rng.uniform();
        subsets.push_back({"subtree", "q=" + detail::fmt(q), detail::random_subtree(spec, c.n_hi, q, rng), 0.0});
    }
    const int block_order = std::min(4, c.n_lo);
    for (int i = 0; i < c.subblocks; ++i) {
        const auto& top = full[static_cast<std::size_t>(block_order)];
        const auto p = top[rng() % top.size()];
        Subset s{"block", "I(" + std::to_string(block_order) + "," + std::to_string(p) + ")", {}, 0.0};
        s.levels.resize(static_cast<std::size_t>(c.n_hi) + 1);
        for (int n = block_order; n <= c.n_hi; ++n)
            s.levels[static_cast<std::size_t>(n)] = detail::inside(full[static_cast<std::size_t>(n)], n, block_order, p);
        subsets.push_back(std::move(s));
    }
    for (auto& s : subsets) s.slope = detail::slope_over(size_log_counts(s.levels, c.n_lo, c.n_hi), c.n_lo, c.n_hi);

    const FbmSampler sampler(c.alpha, c.order);
    const auto per_seed = detail::parallel_map<std::vector<double>>(c.ensemble, c.workers, [&](int i) {
        const auto path = sampler.sample(member_seed(c.seed, static_cast<std::uint64_t>(i)));
        const PathRanges ranges(path);
        std::vector<double> out;
        for (const auto& s : subsets)
            out.push_back(detail::slope_over(image_log_counts(ranges, s.levels, c.n_lo, c.n_hi), c.n_lo, c.n_hi, c.alpha));
        return out;
    });
    ExperimentResult res{c.name, {}, {}};
    Table per_subset{{"subset", "kind", "param", "slope_A", "target", "mean_image_slope", "passes", "runs"}, {}};
    Table runs{{"subset", "run", "seed", "image_slope", "pass"}, {}};
    int hits = 0;
    int total = 0;
    for (std::size_t j = 0; j < subsets.size(); ++j) {
        const double target = subsets[j].slope / c.alpha;
        int passes = 0;
        double mean = 0.0;
        for (std::size_t i = 0; i < per_seed.size(); ++i) {
            const double got = per_seed[i][j];
            const bool ok = std::abs(got - target) <= c.tolerance;
            passes += ok ? 1 : 0;
            mean += got / static_cast<double>(per_seed.size());
            runs.rows.push_back({std::to_string(j), std::to_string(i), std::to_string(member_seed(c.seed, i)),
                                 detail::fmt(got), ok ? "1" : "0"});
        }
        hits += passes;
        total += static_cast<int>(per_seed.size());
        per_subset.rows.push_back({std::to_string(j), subsets[j].kind, subsets[j].param, detail::fmt(subsets[j].slope),
                                   detail::fmt(target), detail::fmt(mean), std::to_string(passes),
                                   std::to_string(per_seed.size())});
    }
    res.assertions.push_back(detail::fraction_at_least("image slope within (1/alpha) slope(A) +- " + detail::fmt(c.tolerance),
                                                       hits, total, c.pass_fraction));
    res.tables.emplace_back(c.name, std::move(per_subset));
    res.tables.emplace_back(c.name + "_runs", std::move(runs));
    return res;
}

// Witness gap: the adversarial witness compresses its image below (1/alpha) of its own slope.
inline ExperimentResult run_witness(const ExperimentConfig& c)
{
    const auto spec = digit_set_from_json(c.set);
    const FbmSampler sampler(c.alpha, c.order);
    const auto results = detail::parallel_map<WitnessResult>(c.ensemble, c.workers, [&](int i) {
        const auto path = sampler.sample(member_seed(c.seed, static_cast<std::uint64_t>(i)));
        return witness_search(path, spec, c.alpha, c.eps, c.depth);
    });
    ExperimentResult res{c.name, {}, {}};
    Table runs{{"run", "seed", "found", "levels", "witness_slope", "image_slope", "gap", "pass"}, {}};
    Table levels{{"run", "level", "m", "n", "population", "parents", "kept", "min_kept", "collision_threshold",
                  "image_boxes"},
                 {}};
    int hits = 0;
    int multi = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& w = results[i];
        const double gap = w.witness_slope / c.alpha - w.image_slope;
        const bool ok = w.found && w.levels.size() >= 2 && gap > c.tolerance;
        hits += ok ? 1 : 0;
        multi += w.found && w.levels.size() >= 2 ? 1 : 0;
        runs.rows.push_back({std::to_string(i), std::to_string(member_seed(c.seed, i)), w.found ? "1" : "0",
                             std::to_string(w.levels.size()), detail::fmt(w.witness_slope), detail::fmt(w.image_slope),
                             detail::fmt(gap), ok ? "1" : "0"});
        for (std::size_t l = 0; l < w.levels.size(); ++l) {
            const auto& lv = w.levels[l];
            levels.rows.push_back({std::to_string(i), std::to_string(l + 1), std::to_string(lv.m), std::to_string(lv.n),
                                   std::to_string(lv.population), std::to_string(lv.parents), std::to_string(lv.kept),
                                   std::to_string(lv.min_kept), detail::fmt(lv.collision_threshold),
                                   std::to_string(lv.image_boxes)});
        }
    }
    const int n = static_cast<int>(results.size());
    res.assertions.push_back(detail::fraction_at_least("multi-level witness found", multi, n, c.pass_fraction));
    res.assertions.push_back(detail::fraction_at_least(
        "image slope below (1/alpha) witness slope - " + detail::fmt(c.tolerance), hits, n, c.pass_fraction));
    res.tables.emplace_back(c.name, std::move(runs));
    res.tables.emplace_back(c.name + "_levels", std::move(levels));
    return res;
}

// Level sets of B restricted to D, at the level of a random point of D.
inline ExperimentResult run_mixed_level_sets(const ExperimentConfig& c)
{
    const auto spec = digit_set_from_json(c.set);
    const auto top = cylinder_indices(spec, c.order);
    const auto levels = cover_levels(spec, c.n_hi);
    const FbmSampler sampler(c.alpha, c.order);
    struct Row {
        std::uint64_t seed;
        double t0;
        double y;
        double slope;
    };
    const auto rows = detail::parallel_map<Row>(c.ensemble, c.workers, [&](int i) {
        const auto seed = member_seed(c.seed, static_cast<std::uint64_t>(i));
        const auto path = sampler.sample(seed);
        const PathRanges ranges(path);
        RandomStream pick(seed, std::uint64_t{1} << 40);
        const auto k = top[pick() % top.size()];
        const double y = path.at(static_cast<std::size_t>(k));
        std::vector<double> counts(static_cast<std::size_t>(c.n_hi) + 1, 0.0);
        for (int n = c.n_lo; n <= c.n_hi; ++n) {
            const auto level = level_set(ranges, y, n);
            std::uint64_t hits = 0;
            const auto& cyl = levels[static_cast<std::size_t>(n)];
            for (const auto& d : level) hits += std::binary_search(cyl.begin(), cyl.end(), d.index()) ? 1 : 0;
            counts[static_cast<std::size_t>(n)] = std::log2(static_cast<double>(std::max<std::uint64_t>(hits, 1)));
        }
        return Row{seed, path.time(static_cast<std::size_t>(k)), y, detail::slope_over(counts, c.n_lo, c.n_hi)};
    });
    ExperimentResult res{c.name, {}, {}};
    Table t{{"run", "seed", "t0", "level", "slope", "pass"}, {}};
    int hits = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool ok = rows[i].slope <= c.tolerance;
        hits += ok ? 1 : 0;
        t.rows.push_back({std::to_string(i), std::to_string(rows[i].seed), detail::fmt(rows[i].t0), detail::fmt(rows[i].y),
                          detail::fmt(rows[i].slope), ok ? "1" : "0"});
    }
    res.assertions.push_back(detail::fraction_at_least("restricted level-set slope <= " + detail::fmt(c.tolerance), hits,
                                                       static_cast<int>(rows.size()), c.pass_fraction));
    res.tables.emplace_back(c.name, std::move(t));
    return res;
}

// Percolation: survival-conditioned box slope, the window event, and the tail check.
inline ExperimentResult run_percolation_dim(const ExperimentConfig& c)
{
    detail::require<ResourceError>(c.depth <= kMaxPercolationDepth, "percolation depth exceeds 24");
    struct Row {
        std::uint64_t seed;
        std::uint64_t resamples;
        double slope;
        bool window_pass;
    };
    // Survivor i is the first surviving key among member_seed(seed, i * 2^20 + r), r = 0, 1, ...
    const auto rows = detail::parallel_map<Row>(c.ensemble, c.workers, [&](int i) {
        for (std::uint64_t r = 0;; ++r) {
            const auto key = member_seed(c.seed, (static_cast<std::uint64_t>(i) << 20) + r);
            const auto s = simulate(c.gamma, c.depth, key);
            if (!s.survived()) continue;
            std::vector<double> counts(static_cast<std::size_t>(c.depth) + 1, 0.0);
            for (int n = c.n_lo; n <= c.n_hi; ++n)
                counts[static_cast<std::size_t>(n)] = std::log2(static_cast<double>(s.level(n).size()));
            const auto ev = window_event(s, c.eps);
            bool ok = true;
            for (const auto& row : ev.rows)
                if (row.n >= c.n_lo && row.n <= c.n_hi && !row.pass) ok = false;
            return Row{key, r, detail::slope_over(counts, c.n_lo, c.n_hi), ok};
        }
    });
    ExperimentResult res{c.name, {}, {}};
    Table t{{"run", "seed", "resamples", "slope", "window_event_pass"}, {}};
    double mean = 0.0;
    int window_hits = 0;
    std::uint64_t resamples = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        mean += rows[i].slope / static_cast<double>(rows.size());
        window_hits += rows[i].window_pass ? 1 : 0;
        resamples += rows[i].resamples;
        t.rows.push_back({std::to_string(i), std::to_string(rows[i].seed), std::to_string(rows[i].resamples),
                          detail::fmt(rows[i].slope), rows[i].window_pass ? "1" : "0"});
    }
    res.assertions.push_back(detail::within("survival-conditioned box slope", mean, 1.0 - c.gamma, c.tolerance));
    res.assertions.push_back(detail::fraction_at_least("window event holds for n in [" + std::to_string(c.n_lo) + "," +
                                                           std::to_string(c.n_hi) + "]",
                                                       window_hits, static_cast<int>(rows.size()), c.pass_fraction));
    const auto tail = tail_check(c.gamma, c.tail_n, c.tail_k, static_cast<std::uint64_t>(c.tail_trials),
                                 member_seed(c.seed, 0x7a11u));
    std::string freqs;
    for (const auto& r : tail.rows) freqs += (freqs.empty() ? "" : " ") + detail::fmt(r.frequency);
    res.assertions.push_back({"tail frequencies strictly decreasing in k", tail.strictly_decreasing,
                              "frequencies " + freqs + ", decay rate " + detail::fmt(tail.decay_rate) + ", resamples " +
                                  std::to_string(resamples)});
    Table tt{{"k", "threshold", "hits", "frequency"}, {}};
    for (const auto& r : tail.rows)
        tt.rows.push_back({detail::fmt(r.k), detail::fmt(r.threshold), std::to_string(r.hits), detail::fmt(r.frequency)});
    res.tables.emplace_back(c.name, std::move(t));
    res.tables.emplace_back(c.name + "_tail", std::move(tt));
    return res;
}

/// The (alpha+eps)-balanced family built from the union of D_S covers at orders [n_lo, n_hi].
inline IntervalFamily heart_family(const DigitSetSpec& spec, double beta, int n_lo, int n_hi)
{
    IntervalFamily u;
    for (int n = n_lo; n <= n_hi; ++n)
        for (auto p : cylinder_indices(spec, n)) u.insert(DyadicInterval(n, p));
    return balance(u, beta);
}

// Heart events: Gamma(U, 3 eps) on balanced families from D_S covers.
inline ExperimentResult run_heart_events(const ExperimentConfig& c)
{
    const auto spec = digit_set_from_json(c.set);
    const auto family = heart_family(spec, c.alpha + c.eps, c.n_lo, c.n_hi);
    const FbmSampler sampler(c.alpha, c.order);
    const auto reports = detail::parallel_map<std::pair<EventReport, EventReport>>(c.ensemble, c.workers, [&](int i) {
        const auto path = sampler.sample(member_seed(c.seed, static_cast<std::uint64_t>(i)));
        const PathRanges ranges(path);
        return std::make_pair(gamma_event(ranges, family, 3 * c.eps, c.n_lo, c.n_hi),
                              pi_event(ranges, family, 3 * c.eps, c.n_lo, c.n_hi));
    });
    ExperimentResult res{c.name, {}, {}};
    res.assertions.push_back({"family is (alpha+eps, eps)-balanced", is_balanced(family, c.alpha + c.eps, c.eps),
                              std::to_string(family.size()) + " intervals"});
    Table t{{"run", "seed", "event", "n", "max_q", "count", "threshold", "pass"}, {}};
    int gamma_hits = 0;
    int pi_hits = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        gamma_hits += reports[i].first.pass() ? 1 : 0;
        pi_hits += reports[i].second.pass() ? 1 : 0;
        for (const auto* rep : {&reports[i].first, &reports[i].second})
            for (const auto& r : rep->rows)
                t.rows.push_back({std::to_string(i), std::to_string(member_seed(c.seed, i)), rep->event, std::to_string(r.n),
                                  std::to_string(r.arg), std::to_string(r.count), detail::fmt(r.threshold),
                                  r.pass ? "1" : "0"});
    }
    const int n = static_cast<int>(reports.size());
    res.assertions.push_back(detail::fraction_at_least("gamma event at 3 eps", gamma_hits, n, c.pass_fraction));
    res.assertions.push_back(detail::fraction_at_least("pi event at 3 eps", pi_hits, n, c.pass_fraction));
    res.tables.emplace_back(c.name, std::move(t));
    return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c)
{
    validate(c);
    if (c.name == "zero_set") return run_zero_or_record(c, false);
    if (c.name == "record_set") return run_zero_or_record(c, true);
    if (c.name == "kahane_image") return run_kahane_image(c);
    if (c.name == "doubling") return run_doubling(c);
    if (c.name == "witness") return run_witness(c);
    if (c.name == "mixed_level_sets") return run_mixed_level_sets(c);
    if (c.name == "percolation_dim") return run_percolation_dim(c);
    if (c.name == "heart_events") return run_heart_events(c);
    throw UnsupportedSpec("unknown experiment '" + c.name + "'");
}

} // namespace dimlab
