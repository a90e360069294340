#pragma once

#include "govdisc/govmodel.hpp"
#include "govdisc/regression_set.hpp"
#include "govdisc/simulate.hpp"
#include "govdisc/smoothdiff.hpp"
#include "govdisc/sparsereg.hpp"

#include <string>
#include <vector>

namespace govdisc {

/// Everything needed to fit one submodel from a tagged dataset.
struct DiscoverySpec {
    ModelKind kind = ModelKind::ToolCool;
    std::vector<std::string> features; // empty: the kind's default set
    HyperParams hp;
    SmootherConfig smoother;
    std::vector<int> sensors{1, 2, 3}; // build only
    SolverOptions solver;
};

/// {T, ω, T_f} for heating, {T} for cooling, {T_build, T_tool, d} for build.
std::vector<std::string> default_features(ModelKind kind);

/// Regression rows restricted to the chosen library features.
DesignMatrix design_for(const RegressionSet& rows, const std::vector<std::string>& features, int degree);

SparseModel discover_submodel(const PhasedDataset& data, const DiscoverySpec& spec);

/// Type II run over `window` seeded from its first measured tool temperature;
/// returns MAPE in percent. Divergence raises NumericalError naming the time.
double tool_validation_mape(const PiecewiseToolModel& model, const PhasedDataset& window,
                            const IntegratorConfig& cfg = {});

/// Build counterpart: each listed thermocouple is simulated from its first
/// measured value with the measured tool drive; MAPE is pooled over them.
double build_validation_mape(const BuildModel& model, const PhasedDataset& window, std::span<const int> sensors,
                             const IntegratorConfig& cfg = {});

} // namespace govdisc
