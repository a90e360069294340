#pragma once

#include "govdisc/smoothdiff.hpp"
#include "govdisc/timeseries.hpp"

#include <span>
#include <string>
#include <vector>

namespace govdisc {

enum class ModelKind { ToolHeat, ToolCool, Build };
const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// Feature names used by regression rows and term libraries. The tool state is
/// "T"; the build state is "T_build".
namespace feature {
inline const std::string T = "T";
inline const std::string omega = "ω";
inline const std::string T_f = "T_f";
inline const std::string f_m = "f_m";
inline const std::string F_m = "F_m";
inline const std::string T_build = "T_build";
inline const std::string T_tool = "T_tool";
inline const std::string d = "d";
} // namespace feature

/// Accepts ASCII spellings ("omega", "w") for the display names above.
std::string canonical_feature(const std::string& name);

struct RegressionSet {
    struct Provenance {
        std::string dataset;
        std::string channel;
        std::string phase_filter;
    };

    std::vector<std::string> names;
    std::vector<std::vector<double>> columns; // one per name
    std::vector<double> target;               // degC/s
    Provenance provenance;

    std::size_t rows() const { return target.size(); }
    const std::vector<double>& column(const std::string& name) const;
    bool has(const std::string& name) const;
};

/// Smoothed temperature of one channel together with its derivative.
struct TemperatureSignal {
    std::vector<double> values;
    DerivativeSeries rate;
};

TemperatureSignal temperature_signal(const PhasedDataset& phased, Channel channel, const SmootherConfig& smoother);

/// ToolHeat: rows over {T, ω, T_f, f_m, F_m} at Heat samples. ToolCool: {T}
/// at Cool samples. Build: {T_build, T_tool, d} for each selected
/// thermocouple (1-based ids), stacked in selection order.
/// `build` is indexed by thermocouple id - 1 and may be empty for tool kinds.
RegressionSet build_regression_set(const PhasedDataset& phased, ModelKind kind, const TemperatureSignal& tool,
                                   std::span<const TemperatureSignal> build = {},
                                   std::span<const int> tc_selection = {});

/// Smooths, differentiates and assembles in one go.
RegressionSet assemble_regression_set(const PhasedDataset& phased, ModelKind kind, const SmootherConfig& smoother,
                                      std::span<const int> tc_selection = {});

} // namespace govdisc
