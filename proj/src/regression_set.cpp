#include "govdisc/regression_set.hpp"

#include "govdisc/error.hpp"
#include "govdisc/log.hpp"

#include <algorithm>

namespace govdisc {

const char* model_kind_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::ToolHeat: return "tool-heat";
    case ModelKind::ToolCool: return "tool-cool";
    case ModelKind::Build: return "build";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& text) {
    if (text == "tool-heat") return ModelKind::ToolHeat;
    if (text == "tool-cool") return ModelKind::ToolCool;
    if (text == "build") return ModelKind::Build;
    throw ConfigError("unknown model kind '" + text + "' (expected tool-heat|tool-cool|build)");
}

std::string canonical_feature(const std::string& name) {
    if (name == "omega" || name == "w" || name == "ω") return feature::omega;
    if (name == "T_tool") return name;
    if (name == "Tf") return feature::T_f;
    return name;
}

const std::vector<double>& RegressionSet::column(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw SchemaError(name, "regression set has no feature '" + name + "'");
    return columns[static_cast<std::size_t>(it - names.begin())];
}

bool RegressionSet::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

TemperatureSignal temperature_signal(const PhasedDataset& phased, Channel channel, const SmootherConfig& smoother) {
    if (!phased.has(channel)) throw DataError(phased.id() + ": channel " + channel_name(channel) + " not present");
    auto raw = phased.channel(channel);
    auto t = phased.channel(Channel::t);
    TemperatureSignal s;
    s.values = smooth_by_segment(raw, phased.tags(), smoother);
    s.rate = differentiate(s.values, t, phased.tags());
    return s;
}

namespace {

void check_aligned(const PhasedDataset& phased, const TemperatureSignal& s, const std::string& what) {
    if (s.values.size() != phased.size() || s.rate.size() != phased.size())
        throw DataError("derivative series for " + what + " not aligned with records");
}

} // namespace

RegressionSet build_regression_set(const PhasedDataset& phased, ModelKind kind, const TemperatureSignal& tool,
                                   std::span<const TemperatureSignal> build, std::span<const int> tc_selection) {
    check_aligned(phased, tool, "T_tool");
    RegressionSet set;
    set.provenance.dataset = phased.id();
    const auto& recs = phased.records();
    const auto& tags = phased.tags();

    if (kind == ModelKind::ToolHeat || kind == ModelKind::ToolCool) {
        Stage want = kind == ModelKind::ToolHeat ? Stage::Heat : Stage::Cool;
        set.provenance.channel = "T_tool";
        set.provenance.phase_filter = stage_name(want);
        set.names = {feature::T};
        std::vector<Channel> inputs;
        if (kind == ModelKind::ToolHeat) {
            const std::vector<std::pair<std::string, Channel>> heat_inputs = {
                {feature::omega, Channel::omega}, {feature::T_f, Channel::T_f},
                {feature::f_m, Channel::f_m}, {feature::F_m, Channel::F_m}};
            for (const auto& [name, ch] : heat_inputs) {
                if (!phased.has(ch)) {
                    log::warn(phased.id() + ": channel " + channel_name(ch) + " absent; feature " + name + " dropped");
                    continue;
                }
                set.names.push_back(name);
                inputs.push_back(ch);
            }
        }
        set.columns.resize(set.names.size());
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (tags[i].stage != want || !tool.rate.valid[i]) continue;
            set.columns[0].push_back(tool.values[i]);
            for (std::size_t k = 0; k < inputs.size(); ++k) set.columns[k + 1].push_back(recs[i].get(inputs[k]));
            set.target.push_back(tool.rate.values[i]);
        }
        if (set.target.empty())
            throw DataError(phased.id() + ": no valid " + std::string(stage_name(want)) + " samples for " +
                            model_kind_name(kind));
    } else {
        if (tc_selection.empty()) throw ConfigError("build regression needs at least one thermocouple");
        set.provenance.channel = "T_build";
        set.provenance.phase_filter = "Heat+Cool";
        set.names = {feature::T_build, feature::T_tool, feature::d};
        set.columns.resize(3);
        std::string sel;
        for (int tc : tc_selection) {
            if (tc < 1 || tc > kSensorCount) throw ConfigError("thermocouple id " + std::to_string(tc) + " out of range 1..4");
            if (static_cast<std::size_t>(tc) > build.size())
                throw DataError("no build temperature signal for KTC" + std::to_string(tc));
            const auto& sig = build[tc - 1];
            check_aligned(phased, sig, "KTC" + std::to_string(tc));
            const Vec3 loc = phased.layout().locations[tc - 1];
            for (std::size_t i = 0; i < recs.size(); ++i) {
                if (!sig.rate.valid[i]) continue;
                set.columns[0].push_back(sig.values[i]);
                set.columns[1].push_back(tool.values[i]);
                set.columns[2].push_back(tool_distance(recs[i].s_tool, loc));
                set.target.push_back(sig.rate.values[i]);
            }
            sel += (sel.empty() ? "KTC" : ",KTC") + std::to_string(tc);
        }
        set.provenance.channel += "[" + sel + "]";
        if (set.target.empty()) throw DataError(phased.id() + ": no valid build samples");
    }

    for (std::size_t c = 0; c < set.columns.size(); ++c)
        for (std::size_t r = 0; r < set.rows(); ++r)
            if (!std::isfinite(set.columns[c][r]) || !std::isfinite(set.target[r]))
                throw DataError(phased.id() + ": non-finite value in feature " + set.names[c] + " at regression row " +
                                std::to_string(r));
    return set;
}

RegressionSet assemble_regression_set(const PhasedDataset& phased, ModelKind kind, const SmootherConfig& smoother,
                                      std::span<const int> tc_selection) {
    auto tool = temperature_signal(phased, Channel::T_tool, smoother);
    std::vector<TemperatureSignal> build;
    if (kind == ModelKind::Build) {
        build.resize(kSensorCount);
        for (int tc : tc_selection) {
            if (tc < 1 || tc > kSensorCount) throw ConfigError("thermocouple id " + std::to_string(tc) + " out of range 1..4");
            build[tc - 1] = temperature_signal(phased, static_cast<Channel>(static_cast<int>(Channel::T_build1) + tc - 1),
                                               smoother);
        }
    }
    return build_regression_set(phased, kind, tool, build, tc_selection);
}

} // namespace govdisc
