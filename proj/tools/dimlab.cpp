// dimlab command-line entry point.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dimlab/digit_set.hpp"
#include "dimlab/dimension_report.hpp"
#include "dimlab/dyadic.hpp"
#include "dimlab/estimators.hpp"
#include "dimlab/experiments.hpp"
#include "dimlab/fbm.hpp"
#include "dimlab/percolation.hpp"
#include "dimlab/selfsimilar.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dimlab;

namespace {

constexpr int kExitAssertion = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

const char* kExperimentSchemas = R"(CSV schemas (one file per table, <out>/<table>.csv):
  zero_set, record_set      run,seed,slope
  kahane_image              run,seed,image_slope
  doubling                  subset,kind,param,slope_A,target,mean_image_slope,passes,runs
  doubling_runs             subset,run,seed,image_slope,pass
  witness                   run,seed,found,levels,witness_slope,image_slope,gap,pass
  witness_levels            run,level,m,n,population,parents,kept,min_kept,collision_threshold,image_boxes
  mixed_level_sets          run,seed,t0,level,slope,pass
  percolation_dim           run,seed,resamples,slope,window_event_pass
  percolation_dim_tail      k,threshold,hits,frequency
  heart_events              run,seed,event,n,max_q,count,threshold,pass
A summary with one PASS/FAIL line per assertion goes to <out>/summary.txt and stdout.
Exit status: 0 all assertions pass, 1 an assertion failed, 2 config or validation error.)";

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    int workers = 1;
};

json load_config(const Common& c)
{
    if (c.config_path.empty()) return json::object();
    std::ifstream in(c.config_path);
    if (!in) throw ParseError("cannot open config '" + c.config_path + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ParseError("config '" + c.config_path + "': " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    try {
        return j.contains(key) ? j.at(key).get<T>() : fallback;
    } catch (const json::exception& e) {
        throw ParseError(std::string("config key '") + key + "': " + e.what());
    }
}

std::uint64_t require_seed(const Common& c, const json& cfg)
{
    if (c.seed) return *c.seed;
    if (cfg.contains("seed")) return get_or<std::uint64_t>(cfg, "seed", 0);
    throw InvalidArgument("a seed is required (--seed or config key 'seed')");
}

/// Writes `name` under --out, or to stdout (with a "# name" banner) when --out is absent.
void emit(const Common& c, const std::string& name, const std::function<void(std::ostream&)>& write)
{
    if (c.out.empty()) {
        std::cout << "# " << name << '\n';
        write(std::cout);
        return;
    }
    fs::create_directories(c.out);
    const auto path = fs::path(c.out) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    write(os);
    if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

int dim_exact(const Common& c)
{
    const auto cfg = load_config(c);
    DimensionReport r;
    if (cfg.contains("set")) {
        const auto spec = digit_set_from_json(cfg.at("set"));
        r = exact_dims(spec);
        if (cfg.contains("profile_n")) {
            const auto grid = get_or(cfg, "eps_grid", DensityProfile::default_grid());
            const auto prof = DensityProfile::compute(spec, get_or<std::int64_t>(cfg, "profile_n", 0), grid);
            emit(c, "density_profile.csv", [&](std::ostream& os) { prof.write_csv(os); });
        }
    } else if (cfg.contains("ifs")) {
        const auto ifs = ifs_from_json(cfg.at("ifs"));
        if (!check_disjoint_images(ifs))
            throw UnsupportedSpec("exact dimensions need pairwise disjoint images; use dim-estimate");
        const auto s = similarity_dimension(ifs);
        const DimensionValue v{s.capped, Method::exact, 0.0};
        r = {v, v, v, v};
    } else {
        throw ParseError("dim-exact config needs 'set' or 'ifs'");
    }
    emit(c, "dims.csv", [&](std::ostream& os) {
        write_report_csv_header(os);
        write_report_csv(os, r);
    });
    emit(c, "dims.json", [&](std::ostream& os) { os << to_json(r).dump(2) << '\n'; });
    return 0;
}

int dim_estimate(const Common& c)
{
    const auto cfg = load_config(c);
    const int n_lo = get_or(cfg, "n_lo", 4);
    const int n_hi = get_or(cfg, "n_hi", 16);
    const double eps = get_or(cfg, "eps", 0.1);
    const int min_len = get_or(cfg, "min_len", 8);
    const double tolerance = get_or(cfg, "tolerance", 0.1);
    detail::require<InvalidArgument>(n_lo >= 1 && n_lo < n_hi, "dim-estimate: need 1 <= n_lo < n_hi");
    IntervalFamily finest;
    std::optional<DimensionReport> exact;
    if (cfg.contains("set")) {
        const auto spec = digit_set_from_json(cfg.at("set"));
        finest = cover(spec, n_hi);
        if (get_or(cfg, "compare_exact", true)) exact = exact_dims(spec);
    } else if (cfg.contains("ifs")) {
        finest = attractor_cover(ifs_from_json(cfg.at("ifs")), n_hi);
    } else if (cfg.contains("family")) {
        const auto u = family_from_text(get_or<std::string>(cfg, "family", ""));
        for (const auto& d : u) detail::require<InvalidArgument>(d.order() == n_hi, "dim-estimate: family must be of order n_hi");
        finest = u;
    } else {
        throw ParseError("dim-estimate config needs 'set', 'ifs' or 'family'");
    }
    const auto h = CoverHierarchy::from_finest(finest, n_lo, n_hi);
    DimensionEstimates est;
    est.minkowski = minkowski_slopes(h, n_lo, n_hi);
    const double qa = window_assouad(h, eps, min_len);
    const double a = window_assouad(h, 0.0, min_len);
    if (!std::isnan(qa)) est.quasi_assouad = DimensionValue{qa, Method::estimated, 0.0};
    if (!std::isnan(a)) est.assouad = DimensionValue{a, Method::estimated, 0.0};
    const auto r = report(exact, est, tolerance);
    emit(c, "cover_sizes.csv", [&](std::ostream& os) {
        os << "n,size\n";
        for (int n = n_lo; n <= n_hi; ++n) os << n << ',' << h.size_at(n) << '\n';
    });
    emit(c, "estimate.csv", [&](std::ostream& os) {
        write_report_csv_header(os);
        write_report_csv(os, r);
    });
    return 0;
}

int sample_fbm(const Common& c)
{
    const auto cfg = load_config(c);
    const auto seed = require_seed(c, cfg);
    const double alpha = get_or(cfg, "alpha", 0.5);
    const int order = get_or(cfg, "order", 12);
    const auto method_name = get_or<std::string>(cfg, "method", "auto");
    FbmMethod method = FbmMethod::automatic;
    if (method_name == "circulant")
        method = FbmMethod::circulant;
    else if (method_name == "dense")
        method = FbmMethod::dense;
    else if (method_name != "auto")
        throw ParseError("unknown fbm method '" + method_name + "'");
    const auto path = sample_path(alpha, order, seed, method);
    const auto format = get_or<std::string>(cfg, "format", "csv");
    if (format == "binary") {
        detail::require<InvalidArgument>(!c.out.empty(), "binary output needs --out");
        emit(c, "path.bin", [&](std::ostream& os) { write_path_binary(os, path); });
    } else if (format == "csv") {
        emit(c, "path.csv", [&](std::ostream& os) { write_path_csv(os, path); });
    } else {
        throw ParseError("unknown path format '" + format + "'");
    }
    emit(c, "summary.txt", [&](std::ostream& os) {
        os << std::setprecision(10) << "alpha " << alpha << "\norder " << order << "\nseed " << seed << "\nholder_stat "
           << holder_stat(path) << '\n';
    });
    return 0;
}

int balance_cmd(const Common& c)
{
    const auto cfg = load_config(c);
    const double beta = get_or(cfg, "beta", 0.5);
    std::string text;
    if (cfg.contains("family_file")) {
        const auto p = get_or<std::string>(cfg, "family_file", "");
        std::ifstream in(p);
        if (!in) throw ParseError("cannot open family file '" + p + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    } else {
        text = get_or<std::string>(cfg, "family", "");
    }
    const auto u = family_from_text(text);
    std::vector<BalanceStep> trace;
    const auto v = balance(u, beta, &trace);
    emit(c, "balanced.txt", [&](std::ostream& os) { os << to_text(v); });
    emit(c, "balance_trace.csv", [&](std::ostream& os) {
        os << "step,m,n,index,removed\n";
        for (std::size_t i = 0; i < trace.size(); ++i)
            os << i << ',' << trace[i].m << ',' << trace[i].n << ',' << trace[i].index << ',' << trace[i].removed << '\n';
    });
    emit(c, "summary.txt", [&](std::ostream& os) {
        os << std::setprecision(10) << "input " << u.size() << " intervals, content " << content(u, beta) << '\n'
           << "output " << v.size() << " intervals, content " << content(v, beta) << '\n'
           << "balanced " << (is_balanced(v, beta) ? "yes" : "no") << '\n';
    });
    return 0;
}

int percolation_cmd(const Common& c)
{
    const auto cfg = load_config(c);
    const auto seed = require_seed(c, cfg);
    const double gamma = get_or(cfg, "gamma", 0.5);
    const int depth = get_or(cfg, "depth", 12);
    const double eps = get_or(cfg, "eps", 0.2);
    const auto s = simulate(gamma, depth, seed);
    emit(c, "levels.txt", [&](std::ostream& os) { s.write_levels(os); });
    emit(c, "counts.csv", [&](std::ostream& os) {
        os << "k,Z\n";
        for (int k = 0; k <= depth; ++k) os << k << ',' << s.level(k).size() << '\n';
    });
    emit(c, "window_event.csv", [&](std::ostream& os) { window_event(s, eps).write_csv(os); });
    if (cfg.contains("tail")) {
        const auto& t = cfg.at("tail");
        const auto table = tail_check(gamma, get_or(t, "n", 12), get_or(t, "k", std::vector<double>{1, 2, 3, 4}),
                                      get_or<std::uint64_t>(t, "trials", 2000), seed);
        emit(c, "tail.csv", [&](std::ostream& os) { table.write_csv(os); });
    }
    return 0;
}

int experiment_cmd(const Common& c)
{
    auto cfg = load_config(c);
    if (!cfg.contains("experiment")) throw ParseError("experiment config needs 'experiment'");
    auto ec = config_from_json(cfg);
    if (c.seed) ec.seed = *c.seed;
    ec.workers = c.workers;
    const auto res = run_experiment(ec);
    for (const auto& [name, table] : res.tables)
        emit(c, name + ".csv", [&](std::ostream& os) { table.write_csv(os); });
    if (!c.out.empty()) emit(c, "summary.txt", [&](std::ostream& os) { res.write_summary(os); });
    res.write_summary(std::cout);
    return res.pass() ? 0 : kExitAssertion;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dimension experiments for fractional Brownian motion images and digit sets"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", common.seed, "master seed (u64)");
    app.add_option("--out", common.out, "output directory (default: stdout)");
    app.add_option("--workers", common.workers, "worker threads")->check(CLI::PositiveNumber);

    struct Cmd {
        const char* name;
        const char* help;
        int (*run)(const Common&);
    };
    const Cmd cmds[] = {
        {"dim-exact", "exact dimensions of a digit set ('set') or a disjoint IFS ('ifs')", dim_exact},
        {"dim-estimate", "cover-slope and window estimates for a 'set', 'ifs' or order-n_hi 'family'", dim_estimate},
        {"sample-fbm", "sample fBm on the dyadic grid (alpha, order, method, format)", sample_fbm},
        {"balance", "balance a dyadic family ('family' text or 'family_file', beta)", balance_cmd},
        {"percolation", "fractal percolation sample (gamma, depth, eps, optional tail)", percolation_cmd},
        {"experiment", "run a named experiment", experiment_cmd},
    };
    int (*selected)(const Common&) = nullptr;
    for (const auto& cmd : cmds) {
        auto* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->callback([&selected, run = cmd.run] { selected = run; });
        if (std::string(cmd.name) == "experiment") {
            std::string names;
            for (const auto& n : experiment_names()) names += (names.empty() ? "" : ", ") + n;
            sub->footer("Experiments: " + names + "\n" + kExperimentSchemas);
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        return selected(common);
    } catch (const dimlab::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
}
