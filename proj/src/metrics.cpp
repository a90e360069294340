#include "govdisc/metrics.hpp"

#include "govdisc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace govdisc {

MapeResult mape(std::span<const double> measured, std::span<const double> predicted) {
    if (measured.size() != predicted.size())
        throw DataError("MAPE: series lengths differ (" + std::to_string(measured.size()) + " vs " +
                        std::to_string(predicted.size()) + ")");
    if (measured.empty()) throw DataError("MAPE: empty series");
    MapeResult r;
    double sum = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        const double m = measured[i], p = predicted[i];
        if (!std::isfinite(m) || !std::isfinite(p) || std::fabs(m) <= kMapeFloor) {
            ++r.n_skipped;
            continue;
        }
        sum += std::fabs(m - p) / std::fabs(m);
        ++r.n_used;
    }
    if (r.n_used == 0) throw DataError("MAPE: every sample was skipped (near-zero or non-finite)");
    r.value = sum / static_cast<double>(r.n_used) * 100.0;
    return r;
}

std::vector<ComparisonRow> comparison_table(std::span<const ComparisonRun> runs) {
    std::vector<ComparisonRow> rows;
    for (const auto& run : runs) {
        auto m = mape(run.measured, run.predicted);
        rows.push_back({run.name, m.value, run.seconds, m.n_used});
    }
    return rows;
}

void write_table_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
    out << "run,mape_percent,time_s,samples\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%zu\n", r.name.c_str(), r.mape, r.seconds, r.n_used);
        out << buf;
    }
}

void write_table_text(std::ostream& out, std::span<const ComparisonRow> rows) {
    std::size_t w = 4;
    for (const auto& r : rows) w = std::max(w, r.name.size());
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-*s  %10s  %10s\n", static_cast<int>(w), "Run", "MAPE (%)", "Time (s)");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-*s  %10.4f  %10.4f\n", static_cast<int>(w), r.name.c_str(), r.mape,
                      r.seconds);
        out << buf;
    }
}

} // namespace govdisc
