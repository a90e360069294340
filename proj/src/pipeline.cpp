#include "govdisc/pipeline.hpp"

#include "govdisc/error.hpp"
#include "govdisc/metrics.hpp"

#include <cstdio>

namespace govdisc {

std::vector<std::string> default_features(ModelKind kind) {
    switch (kind) {
    case ModelKind::ToolHeat: return {feature::T, feature::omega, feature::T_f};
    case ModelKind::ToolCool: return {feature::T};
    case ModelKind::Build: return {feature::T_build, feature::T_tool, feature::d};
    }
    return {};
}

DesignMatrix design_for(const RegressionSet& rows, const std::vector<std::string>& features, int degree) {
    std::vector<std::string> canon;
    for (const auto& f : features) canon.push_back(canonical_feature(f));
    auto lib = build_library(canon, degree);
    return evaluate_library(lib, rows);
}

SparseModel discover_submodel(const PhasedDataset& data, const DiscoverySpec& spec) {
    auto feats = spec.features.empty() ? default_features(spec.kind) : spec.features;
    const std::string state = spec.kind == ModelKind::Build ? feature::T_build : feature::T;
    if (feats.empty() || canonical_feature(feats.front()) != state)
        throw ConfigError("the first library feature must be the state " + state);
    auto rows = assemble_regression_set(data, spec.kind, spec.smoother, spec.sensors);
    auto dm = design_for(rows, feats, spec.hp.max_degree);
    return discover(dm, rows.target, spec.hp, spec.solver);
}

double tool_validation_mape(const PiecewiseToolModel& model, const PhasedDataset& window, const IntegratorConfig& cfg) {
    if (window.size() == 0) throw ConfigError("validation window is empty");
    const double seed = window.records().front().T_tool;
    if (!std::isfinite(seed)) throw ConfigError("validation window has no measured initial value");
    auto r = simulate_type2(model, window, seed, cfg);
    if (r.diverged) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "simulation diverged at t=%g s", *r.divergence_time);
        throw NumericalError(buf);
    }
    return mape(r.measured, r.predicted).value;
}

double build_validation_mape(const BuildModel& model, const PhasedDataset& window, std::span<const int> sensors,
                             const IntegratorConfig& cfg) {
    if (window.size() == 0) throw ConfigError("validation window is empty");
    if (sensors.empty()) throw ConfigError("no thermocouples selected for validation");
    auto drive = make_build_drive(window, ToolSource::Measured);
    std::vector<double> measured, predicted;
    BuildOptions opts;
    opts.integrator = cfg;
    for (int id : sensors) {
        if (id < 1 || id > kSensorCount) throw ConfigError("thermocouple id out of range: " + std::to_string(id));
        const auto ch = static_cast<Channel>(static_cast<int>(Channel::T_build1) + id - 1);
        if (!window.has(ch)) throw DataError("validation window lacks " + channel_name(ch));
        const auto series = window.channel(ch);
        const Vec3 loc = model.layout.locations[static_cast<std::size_t>(id - 1)];
        const double seed = series.front();
        auto r = simulate_build(model, drive, std::span<const Vec3>(&loc, 1), std::span<const double>(&seed, 1), opts);
        if (r[0].diverged) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "simulation diverged at t=%g s", *r[0].divergence_time);
            throw NumericalError(buf);
        }
        measured.insert(measured.end(), series.begin(), series.end());
        predicted.insert(predicted.end(), r[0].predicted.begin(), r[0].predicted.end());
    }
    return mape(measured, predicted).value;
}

} // namespace govdisc
