#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "dimlab/error.hpp"

namespace dimlab {

enum class Method { exact, estimated, missing };

inline const char* to_string(Method m)
{
    switch (m) {
    case Method::exact: return "exact";
    case Method::estimated: return "estimated";
    case Method::missing: return "missing";
    }
    return "missing";
}

struct DimensionValue {
    double value = std::nan("");
    Method method = Method::missing;
    double uncertainty = 0.0;

    [[nodiscard]] bool present() const { return method != Method::missing; }
};

/// Hausdorff <= packing <= modified Assouad <= Assouad.
struct DimensionReport {
    DimensionValue hausdorff;
    DimensionValue packing;
    DimensionValue modified_assouad;
    DimensionValue assouad;

    /// Pairs of present values that break the chain by more than their combined uncertainty.
    [[nodiscard]] std::optional<std::string> chain_violation(double slack = 0.0) const
    {
        const DimensionValue* chain[] = {&hausdorff, &packing, &modified_assouad, &assouad};
        const char* names[] = {"hausdorff", "packing", "modified_assouad", "assouad"};
        for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j) {
                if (!chain[i]->present() || !chain[j]->present()) continue;
                const double tol = chain[i]->uncertainty + chain[j]->uncertainty + slack;
                if (chain[i]->value > chain[j]->value + tol)
                    return std::string(names[i]) + " " + std::to_string(chain[i]->value) + " exceeds " + names[j] +
                           " " + std::to_string(chain[j]->value);
            }
        }
        return std::nullopt;
    }
};

inline nlohmann::json to_json(const DimensionValue& v)
{
    nlohmann::json j;
    j["method"] = to_string(v.method);
    if (v.present()) {
        j["value"] = v.value;
        j["uncertainty"] = v.uncertainty;
    }
    return j;
}

inline nlohmann::json to_json(const DimensionReport& r)
{
    return {{"hausdorff", to_json(r.hausdorff)},
            {"packing", to_json(r.packing)},
            {"modified_assouad", to_json(r.modified_assouad)},
            {"assouad", to_json(r.assouad)}};
}

inline void write_report_csv_header(std::ostream& os) { os << "dimension,value,method,uncertainty\n"; }

inline void write_report_csv(std::ostream& os, const DimensionReport& r)
{
    auto row = [&](const char* name, const DimensionValue& v) {
        os << name << ',';
        if (v.present()) os << v.value;
        os << ',' << to_string(v.method) << ',' << v.uncertainty << '\n';
    };
    row("hausdorff", r.hausdorff);
    row("packing", r.packing);
    row("modified_assouad", r.modified_assouad);
    row("assouad", r.assouad);
}

} // namespace dimlab
