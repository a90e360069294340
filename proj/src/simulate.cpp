#include "govdisc/simulate.hpp"

#include "govdisc/error.hpp"
#include "govdisc/regression_set.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace govdisc {

void IntegratorConfig::validate() const {
    if (substeps < 1) throw ConfigError("integrator substeps must be >= 1");
}

Trajectory integrate_segment(const ScalarRhs& rhs, double T0, std::span<const double> t,
                             std::span<const double> inputs, std::size_t width, const IntegratorConfig& cfg) {
    cfg.validate();
    const std::size_t n = t.size();
    if (width && inputs.size() < (n ? n - 1 : 0) * width)
        throw DataError("input table shorter than the time grid");
    Trajectory out;
    out.values.assign(n, NAN);
    if (n == 0) return out;
    out.values[0] = T0;
    if (!std::isfinite(T0) || std::fabs(T0) > kDivergenceLimit) {
        out.diverged = true;
        out.divergence_index = 0;
        out.values[0] = NAN;
        return out;
    }
    double y = T0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = (t[i + 1] - t[i]) / cfg.substeps;
        std::span<const double> row = width ? inputs.subspan(i * width, width) : std::span<const double>{};
        auto f = [&](double T) { return rhs(T, row); };
        for (int s = 0; s < cfg.substeps && std::isfinite(y); ++s) y = rk4_step(f, y, h);
        if (!std::isfinite(y) || std::fabs(y) > kDivergenceLimit) {
            out.diverged = true;
            out.divergence_index = i + 1;
            return out;
        }
        out.values[i + 1] = y;
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

// Input slots for tool models: state first, then every channel a heating
// submodel may use, then the stage flag.
const std::vector<std::string> kToolSlots{feature::T, feature::omega, feature::T_f, feature::f_m, feature::F_m};
constexpr std::size_t kToolWidth = 6;
constexpr std::size_t kStageSlot = 5;

Channel channel_for(const std::string& feat) {
    if (feat == feature::omega) return Channel::omega;
    if (feat == feature::T_f) return Channel::T_f;
    if (feat == feature::f_m) return Channel::f_m;
    if (feat == feature::F_m) return Channel::F_m;
    throw ConfigError("tool model uses unsupported feature '" + feat + "'");
}

void require_inputs(const PiecewiseToolModel& model, const PhasedDataset& data) {
    for (const SparseModel* sub : {&model.heating, &model.cooling})
        for (const auto& f : sub->library.features()) {
            if (f == feature::T) continue;
            Channel c = channel_for(f);
            if (!data.has(c)) throw DataError("dataset lacks channel " + channel_name(c) + " required by the tool model");
        }
}

std::vector<double> tool_input_table(const PhasedDataset& data) {
    const auto& recs = data.records();
    std::vector<double> table(recs.size() * kToolWidth);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        double* row = &table[i * kToolWidth];
        row[0] = 0.0;
        row[1] = recs[i].omega;
        row[2] = recs[i].T_f;
        row[3] = recs[i].f_m;
        row[4] = recs[i].F_m;
        row[kStageSlot] = data.tags()[i].stage == Stage::Heat ? 0.0 : 1.0;
    }
    return table;
}

ScalarRhs tool_rhs(const PiecewiseToolModel& model) {
    auto heat = std::make_shared<BoundModel>(model.heating, kToolSlots);
    auto cool = std::make_shared<BoundModel>(model.cooling, kToolSlots);
    return [heat, cool](double T, std::span<const double> row) {
        double buf[kToolWidth];
        for (std::size_t j = 0; j < kToolWidth; ++j) buf[j] = row[j];
        buf[0] = T;
        std::span<const double> slots(buf, kToolWidth - 1);
        return row[kStageSlot] == 0.0 ? (*heat)(slots) : (*cool)(slots);
    };
}

SimulationResult base_result(const PhasedDataset& data) {
    SimulationResult r;
    r.t = data.channel(Channel::t);
    r.measured = data.has(Channel::T_tool) ? data.channel(Channel::T_tool) : std::vector<double>(data.size(), NAN);
    r.predicted.assign(data.size(), NAN);
    r.tags = data.tags();
    return r;
}

bool selected(StageFilter f, Stage s) {
    return f == StageFilter::Both || (f == StageFilter::Heat && s == Stage::Heat) ||
           (f == StageFilter::Cool && s == Stage::Cool);
}

} // namespace

SimulationResult simulate_type1(const PiecewiseToolModel& model, const PhasedDataset& data, StageFilter filter,
                                const IntegratorConfig& cfg) {
    cfg.validate();
    if (!data.has(Channel::T_tool)) throw DataError("Type I simulation needs measured tool temperatures for seeding");
    require_inputs(model, data);
    SimulationResult r = base_result(data);
    r.label = "type1";
    const auto table = tool_input_table(data);
    const auto rhs = tool_rhs(model);

    const auto t0 = Clock::now();
    for (const auto& seg : phase_segments(data.tags())) {
        if (!selected(filter, seg.stage)) continue;
        const double seed = r.measured[seg.begin];
        if (!std::isfinite(seed))
            throw DataError("no measured seed at sample " + std::to_string(seg.begin) + " (layer " +
                            std::to_string(seg.layer) + ")");
        std::span<const double> ts(r.t.data() + seg.begin, seg.size());
        std::span<const double> in(table.data() + seg.begin * kToolWidth, (seg.size() - 1) * kToolWidth);
        auto traj = integrate_segment(rhs, seed, ts, in, kToolWidth, cfg);
        for (std::size_t i = 0; i < seg.size(); ++i) r.predicted[seg.begin + i] = traj.values[i];
        SegmentResult sr{seg.layer, seg.stage, seg.begin, seg.end, traj.values.front(), traj.values.back()};
        r.segments.push_back(sr);
        if (traj.diverged && !r.diverged) {
            r.diverged = true;
            r.divergence_time = r.t[seg.begin + traj.divergence_index];
        }
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

SimulationResult simulate_type2(const PiecewiseToolModel& model, const PhasedDataset& data, double T0,
                                const IntegratorConfig& cfg) {
    cfg.validate();
    if (!std::isfinite(T0)) throw ConfigError("initial temperature must be finite");
    require_inputs(model, data);
    SimulationResult r = base_result(data);
    r.label = "type2";
    const auto table = tool_input_table(data);
    const auto rhs = tool_rhs(model);

    const auto t0 = Clock::now();
    auto traj = integrate_segment(rhs, T0, r.t, table, kToolWidth, cfg);
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    r.predicted = std::move(traj.values);
    if (traj.diverged) {
        r.diverged = true;
        r.divergence_time = r.t[traj.divergence_index];
    }
    const auto segs = phase_segments(data.tags());
    for (std::size_t s = 0; s < segs.size(); ++s) {
        const auto& seg = segs[s];
        const std::size_t last = s + 1 < segs.size() ? segs[s + 1].begin : seg.end - 1;
        r.segments.push_back({seg.layer, seg.stage, seg.begin, seg.end, r.predicted[seg.begin], r.predicted[last]});
    }
    return r;
}

const char* tool_source_name(ToolSource s) { return s == ToolSource::Measured ? "measured" : "simulated"; }

ToolSource parse_tool_source(const std::string& text) {
    if (text == "measured") return ToolSource::Measured;
    if (text == "simulated") return ToolSource::Simulated;
    throw ConfigError("tool source must be 'measured' or 'simulated', got '" + text + "'");
}

BuildDrive make_build_drive(const PhasedDataset& data, ToolSource source, const PiecewiseToolModel* tool, double T0,
                            const IntegratorConfig& cfg) {
    for (Channel c : {Channel::x, Channel::y, Channel::z})
        if (!data.has(c)) throw DataError("build simulation needs tool position channel " + channel_name(c));
    BuildDrive d;
    d.source = source;
    d.t = data.channel(Channel::t);
    d.tags = data.tags();
    for (const auto& rec : data.records()) d.s_tool.push_back(rec.s_tool);
    if (source == ToolSource::Measured) {
        if (!data.has(Channel::T_tool)) throw DataError("measured tool source needs the T_tool channel");
        d.T_tool = data.channel(Channel::T_tool);
    } else {
        if (!tool) throw ConfigError("simulated tool source needs a tool model");
        auto r = simulate_type2(*tool, data, T0, cfg);
        if (r.diverged) throw NumericalError("tool simulation diverged while building the drive");
        d.T_tool = std::move(r.predicted);
    }
    return d;
}

std::vector<double> distance_series(const BuildDrive& drive, const Vec3& location, bool freeze_d_on_cool) {
    std::vector<double> d(drive.t.size());
    double held = NAN;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double now = tool_distance(drive.s_tool[i], location);
        const bool cooling = drive.tags[i].stage == Stage::Cool;
        if (freeze_d_on_cool && cooling && std::isfinite(held)) {
            d[i] = held;
        } else {
            d[i] = now;
            if (!cooling) held = now;
        }
    }
    return d;
}

std::vector<SimulationResult> simulate_build(const BuildModel& model, const BuildDrive& drive,
                                             std::span<const Vec3> locations, std::span<const double> T0,
                                             const BuildOptions& opts) {
    opts.integrator.validate();
    if (T0.size() != locations.size() && T0.size() != 1)
        throw ConfigError("need one initial build temperature per location (or a single shared one)");
    const std::size_t n = drive.t.size();
    if (drive.T_tool.size() != n || drive.s_tool.size() != n || drive.tags.size() != n)
        throw DataError("build drive channels differ in length");

    const std::vector<std::string> slots{feature::T_build, feature::T_tool, feature::d};
    const BoundModel bound(model.model, slots);
    const ScalarRhs rhs = [&bound](double T, std::span<const double> row) {
        const double buf[3] = {T, row[1], row[2]};
        return bound(buf);
    };

    std::vector<SimulationResult> out(locations.size());
    auto run = [&](long li) {
        const auto t0 = Clock::now();
        const auto d = distance_series(drive, locations[li], opts.freeze_d_on_cool);
        std::vector<double> table(n * 3);
        for (std::size_t i = 0; i < n; ++i) {
            table[i * 3] = 0.0;
            table[i * 3 + 1] = drive.T_tool[i];
            table[i * 3 + 2] = d[i];
        }
        const double init = T0.size() == 1 ? T0[0] : T0[li];
        auto traj = integrate_segment(rhs, init, drive.t, table, 3, opts.integrator);
        SimulationResult& r = out[li];
        char label[64];
        std::snprintf(label, sizeof label, "x=%.3f", locations[li].x);
        r.label = label;
        r.t = drive.t;
        r.measured.assign(n, NAN);
        r.predicted = std::move(traj.values);
        r.tags = drive.tags;
        if (traj.diverged) {
            r.diverged = true;
            r.divergence_time = drive.t[traj.divergence_index];
        }
        r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    };
    const long count = static_cast<long>(locations.size());
    if (opts.exec == Execution::Serial) {
        for (long i = 0; i < count; ++i) run(i);
    } else {
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
        for (long i = 0; i < count; ++i) run(i);
    }
    return out;
}

std::vector<Vec3> centerline_locations(int count, double wall_length, const SensorLayout& layout) {
    if (count < 1) throw ConfigError("need at least one map location");
    std::vector<Vec3> out;
    const double y = layout.locations[0].y;
    const double z = layout.locations[0].z;
    for (int i = 0; i < count; ++i) {
        double x = count == 1 ? 0.5 * wall_length : wall_length * i / (count - 1);
        out.push_back({x, y, z});
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const SimulationResult& r) {
    out << "timestamp,measured,predicted,layer,stage\n";
    // Missing values (unsimulated, diverged, unmeasured) are empty cells.
    auto cell = [](double v) {
        if (!std::isfinite(v)) return std::string();
        char b[32];
        std::snprintf(b, sizeof b, "%.17g", v);
        return std::string(b);
    };
    for (std::size_t i = 0; i < r.t.size(); ++i)
        out << cell(r.t[i]) << ',' << cell(r.measured[i]) << ',' << cell(r.predicted[i]) << ',' << r.tags[i].layer
            << ',' << stage_name(r.tags[i].stage) << '\n';
}

} // namespace govdisc
