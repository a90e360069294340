#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace govdisc {

/// Samples whose measured magnitude is at or below this are skipped.
inline constexpr double kMapeFloor = 1e-6;

struct MapeResult {
    double value = 0.0; // percent
    std::size_t n_used = 0;
    std::size_t n_skipped = 0;
};

/// Mean of |m - p| / m * 100 with the measured series as denominator. Samples
/// where either value is non-finite are skipped along with near-zero ones.
MapeResult mape(std::span<const double> measured, std::span<const double> predicted);

struct ComparisonRow {
    std::string name;
    double mape = 0.0;    // percent
    double seconds = 0.0; // wall clock
    std::size_t n_used = 0;
};

struct ComparisonRun {
    std::string name;
    std::vector<double> measured;
    std::vector<double> predicted;
    double seconds = 0.0;
};

std::vector<ComparisonRow> comparison_table(std::span<const ComparisonRun> runs);
void write_table_csv(std::ostream& out, std::span<const ComparisonRow> rows);
void write_table_text(std::ostream& out, std::span<const ComparisonRow> rows);

} // namespace govdisc
