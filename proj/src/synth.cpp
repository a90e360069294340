#include "govdisc/synth.hpp"

#include "govdisc/error.hpp"
#include "govdisc/regression_set.hpp"
#include "govdisc/simulate.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace govdisc {

double TorqueProfile::value(double t_heat, double t) const {
    switch (kind) {
    case Kind::Constant:
        return level;
    case Kind::WithRipple:
        return level * (1.0 + amplitude * std::sin(2.0 * std::numbers::pi * t / period));
    case Kind::RampThenHold:
        return t_heat < ramp_time ? level * (0.5 + 0.5 * t_heat / ramp_time) : level;
    }
    return level;
}

namespace {

bool multiple_of(double value, double step) {
    double q = value / step;
    return std::fabs(q - std::round(q)) < 1e-9;
}

} // namespace

void ProcessPlan::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("plan: ") + name + " must be > 0");
    };
    if (layers < 0) throw ConfigError("plan: layers must be >= 0");
    positive(wall_length, "wall_length");
    positive(traverse_speed, "traverse_speed");
    positive(deposit_omega, "deposit_omega");
    positive(preheat_omega, "preheat_omega");
    positive(preheat_duration, "preheat_duration");
    positive(cool_duration, "cool_duration");
    positive(preheat_feed, "preheat_feed");
    positive(deposit_feed, "deposit_feed");
    positive(layer_thickness, "layer_thickness");
    positive(sensor_depth, "sensor_depth");
    positive(sample_period, "sample_period");
    if (spindle_ramp < 0.0) throw ConfigError("plan: spindle_ramp must be >= 0");
    if (!std::isfinite(ambient)) throw ConfigError("plan: ambient must be finite");
    if (substeps < 1) throw ConfigError("plan: substeps must be >= 1");
    if (noise < 0.0 || !std::isfinite(noise)) throw ConfigError("plan: noise must be >= 0");
    if (torque.level < 0.0) throw ConfigError("plan: torque level must be >= 0");
    if (torque.kind == TorqueProfile::Kind::WithRipple && !(torque.period > 0.0))
        throw ConfigError("plan: torque ripple period must be > 0");
    if (torque.kind == TorqueProfile::Kind::RampThenHold && !(torque.ramp_time > 0.0))
        throw ConfigError("plan: torque ramp time must be > 0");
    for (double d : {preheat_duration, deposition_duration(), cool_duration})
        if (!multiple_of(d, sample_period))
            throw ConfigError("plan: stage durations must be whole multiples of sample_period");
}

double ProcessPlan::deposition_duration() const { return std::round(wall_length / (traverse_speed / 60.0)); }

std::size_t ProcessPlan::sample_count() const {
    return static_cast<std::size_t>(layers) * static_cast<std::size_t>(std::llround(cycle_duration() / sample_period));
}

ProcessPlan ProcessPlan::from_config(const KvConfig& cfg) {
    ProcessPlan p;
    for (const auto& sec : cfg.sections())
        if (sec != "plan" && !(sec.empty() && cfg.section(sec).empty()))
            throw ConfigError(cfg.source() + ": unknown plan section [" + sec + "]");
    if (!cfg.has_section("plan")) return p;
    for (const auto& e : cfg.section("plan")) {
        auto d = [&] { return parse_double(e.value, "plan." + e.key); };
        const auto& k = e.key;
        if (k == "layers") p.layers = static_cast<int>(parse_int(e.value, "plan.layers"));
        else if (k == "wall_length") p.wall_length = d();
        else if (k == "traverse_speed") p.traverse_speed = d();
        else if (k == "deposit_omega") p.deposit_omega = d();
        else if (k == "preheat_omega") p.preheat_omega = d();
        else if (k == "preheat_duration") p.preheat_duration = d();
        else if (k == "cool_duration") p.cool_duration = d();
        else if (k == "spindle_ramp") p.spindle_ramp = d();
        else if (k == "preheat_feed") p.preheat_feed = d();
        else if (k == "deposit_feed") p.deposit_feed = d();
        else if (k == "layer_thickness") p.layer_thickness = d();
        else if (k == "sensor_depth") p.sensor_depth = d();
        else if (k == "ambient") p.ambient = d();
        else if (k == "sample_period") p.sample_period = d();
        else if (k == "substeps") p.substeps = static_cast<int>(parse_int(e.value, "plan.substeps"));
        else if (k == "input_hold") {
            if (e.value == "continuous") p.input_hold = InputHold::Continuous;
            else if (e.value == "sample") p.input_hold = InputHold::SampleHold;
            else throw ConfigError("plan.input_hold must be 'continuous' or 'sample'");
        } else if (k == "torque") {
            if (e.value == "constant") p.torque.kind = TorqueProfile::Kind::Constant;
            else if (e.value == "ramp-then-hold") p.torque.kind = TorqueProfile::Kind::RampThenHold;
            else if (e.value == "ripple") p.torque.kind = TorqueProfile::Kind::WithRipple;
            else throw ConfigError("plan.torque must be constant, ramp-then-hold or ripple");
        } else if (k == "torque_level") p.torque.level = d();
        else if (k == "torque_amplitude") p.torque.amplitude = d();
        else if (k == "torque_period") p.torque.period = d();
        else if (k == "torque_ramp") p.torque.ramp_time = d();
        else if (k == "noise") p.noise = d();
        else if (k == "seed") p.seed = static_cast<std::uint64_t>(parse_int(e.value, "plan.seed"));
        else throw ConfigError(cfg.source() + ":" + std::to_string(e.line) + ": unknown plan key '" + k + "'");
    }
    p.validate();
    return p;
}

PlanInputs plan_inputs(const ProcessPlan& plan, int layer, Stage stage, double tau) {
    PlanInputs in;
    in.tag = {layer, stage};
    const double z = layer * plan.layer_thickness;
    const double v = plan.traverse_speed / 60.0; // mm/s
    const double t_abs = (layer - 1) * plan.cycle_duration() + tau;
    if (stage == Stage::Cool) {
        const double x_end = std::min(v * plan.deposition_duration(), plan.wall_length);
        in.s_tool = {x_end, 0.0, z};
        return in;
    }
    in.T_f = plan.torque.value(tau, t_abs);
    if (tau < plan.preheat_duration) {
        in.omega = plan.preheat_omega;
        in.f_m = plan.preheat_feed * 60.0;
        in.s_tool = {0.0, 0.0, z};
        return in;
    }
    const double td = tau - plan.preheat_duration;
    if (plan.spindle_ramp > 0.0 && td < plan.spindle_ramp) {
        const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * td / plan.spindle_ramp);
        in.omega = plan.preheat_omega + (plan.deposit_omega - plan.preheat_omega) * w;
    } else {
        in.omega = plan.deposit_omega;
    }
    in.f_m = plan.deposit_feed * 60.0;
    const double x = v * td;
    if (x < plan.wall_length) {
        in.s_tool = {x, 0.0, z};
        in.v_tool = {v, 0.0, 0.0};
        in.f_t = plan.traverse_speed;
    } else {
        in.s_tool = {plan.wall_length, 0.0, z};
    }
    return in;
}

PlanInputs plan_inputs(const ProcessPlan& plan, double t) {
    const double cyc = plan.cycle_duration();
    const int layer = static_cast<int>(std::floor(t / cyc)) + 1;
    const double tau = t - (layer - 1) * cyc;
    return plan_inputs(plan, layer, tau < plan.heat_duration() ? Stage::Heat : Stage::Cool, tau);
}

InputProfile generate_profile(const ProcessPlan& plan) {
    plan.validate();
    InputProfile prof;
    const std::size_t n = plan.sample_count();
    const auto per_layer = static_cast<std::size_t>(std::llround(plan.cycle_duration() / plan.sample_period));
    prof.t.reserve(n);
    prof.inputs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int layer = static_cast<int>(i / per_layer) + 1;
        const double tau = static_cast<double>(i % per_layer) * plan.sample_period;
        const Stage stage = tau < plan.heat_duration() - 1e-9 ? Stage::Heat : Stage::Cool;
        prof.t.push_back(static_cast<double>(i) * plan.sample_period);
        prof.inputs.push_back(plan_inputs(plan, layer, stage, tau));
    }
    return prof;
}

namespace {

constexpr int kState = 1 + kSensorCount;
using State = std::array<double, kState>;

const std::vector<std::string> kToolSlots{feature::T, feature::omega, feature::T_f, feature::f_m, feature::F_m};

void check_tool_features(const PiecewiseToolModel& tool) {
    for (const SparseModel* m : {&tool.heating, &tool.cooling})
        for (const auto& f : m->library.features())
            if (f != feature::T && f != feature::omega && f != feature::T_f && f != feature::f_m)
                throw ConfigError("synthetic plans do not generate input '" + f + "'");
}

} // namespace

SyntheticDataset generate_ground_truth(const PiecewiseToolModel& tool, const std::optional<BuildModel>& build,
                                       const ProcessPlan& plan) {
    plan.validate();
    check_tool_features(tool);
    const BoundModel heat(tool.heating, kToolSlots);
    const BoundModel cool(tool.cooling, kToolSlots);
    BoundModel bmodel;
    if (build) bmodel = BoundModel(build->model, {feature::T_build, feature::T_tool, feature::d});
    const SensorLayout layout = build ? build->layout : plan.layout();
    const int nb = build ? kSensorCount : 0;

    const std::size_t n = plan.sample_count();
    const auto per_layer = static_cast<std::size_t>(std::llround(plan.cycle_duration() / plan.sample_period));
    const double h = plan.sample_period / plan.substeps;

    auto deriv = [&](const State& y, const PlanInputs& in) {
        State dy{};
        const double slots[5] = {y[0], in.omega, in.T_f, in.f_m, NAN};
        dy[0] = in.tag.stage == Stage::Heat ? heat(slots) : cool(slots);
        for (int j = 0; j < nb; ++j) {
            const double b[3] = {y[1 + j], y[0], tool_distance(in.s_tool, layout.locations[j])};
            dy[1 + j] = bmodel(b);
        }
        return dy;
    };
    auto axpy = [](const State& y, double a, const State& k) {
        State r;
        for (int j = 0; j < kState; ++j) r[j] = y[j] + a * k[j];
        return r;
    };

    Dataset clean;
    clean.id = "synthetic";
    clean.layout = layout;
    std::vector<PhaseTag> tags;
    clean.records.reserve(n);
    tags.reserve(n);

    State y;
    y.fill(plan.ambient);
    const bool hold = plan.input_hold == ProcessPlan::InputHold::SampleHold;
    for (std::size_t i = 0; i < n; ++i) {
        const int layer = static_cast<int>(i / per_layer) + 1;
        const double tau = static_cast<double>(i % per_layer) * plan.sample_period;
        const Stage stage = tau < plan.heat_duration() - 1e-9 ? Stage::Heat : Stage::Cool;
        const PlanInputs in0 = plan_inputs(plan, layer, stage, tau);

        ProcessRecord rec;
        rec.t = static_cast<double>(i) * plan.sample_period;
        rec.T_tool = y[0];
        for (int j = 0; j < nb; ++j) rec.T_build[j] = y[1 + j];
        rec.omega = in0.omega;
        rec.f_t = in0.f_t;
        rec.f_m = in0.f_m;
        rec.T_f = in0.T_f;
        rec.P_f = in0.T_f * in0.omega * 2.0 * std::numbers::pi / 60.0;
        rec.s_tool = in0.s_tool;
        rec.v_tool = in0.v_tool;
        clean.records.push_back(rec);
        tags.push_back(in0.tag);

        if (i + 1 == n) break;
        for (int s = 0; s < plan.substeps; ++s) {
            const double ta = tau + s * h;
            auto at = [&](double tt) { return hold ? in0 : plan_inputs(plan, layer, stage, tt); };
            const PlanInputs ia = at(ta), im = at(ta + 0.5 * h), ib = at(ta + h);
            const State k1 = deriv(y, ia);
            const State k2 = deriv(axpy(y, 0.5 * h, k1), im);
            const State k3 = deriv(axpy(y, 0.5 * h, k2), im);
            const State k4 = deriv(axpy(y, h, k3), ib);
            for (int j = 0; j < kState; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        for (int j = 0; j < 1 + nb; ++j) {
            if (!std::isfinite(y[j]) || std::fabs(y[j]) > kDivergenceLimit) {
                char buf[256];
                std::snprintf(buf, sizeof buf,
                              "plan error: ground-truth %s temperature diverged at t=%g s (layer %d); "
                              "check torque_level=%g and the spindle speeds",
                              j == 0 ? "tool" : "build", rec.t + plan.sample_period, layer, plan.torque.level);
                throw ConfigError(buf);
            }
        }
    }

    for (Channel c : {Channel::t, Channel::T_tool, Channel::omega, Channel::f_t, Channel::f_m, Channel::T_f,
                      Channel::P_f, Channel::x, Channel::y, Channel::z, Channel::vx, Channel::vy, Channel::vz})
        clean.present.set(static_cast<int>(c));
    for (int j = 0; j < nb; ++j) clean.present.set(static_cast<int>(Channel::T_build1) + j);
    clean.column_tags = tags;

    Dataset noisy = clean;
    if (plan.noise > 0.0) {
        std::mt19937_64 rng(plan.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& rec : noisy.records) {
            rec.T_tool *= 1.0 + plan.noise * gauss(rng);
            for (int j = 0; j < nb; ++j) rec.T_build[j] *= 1.0 + plan.noise * gauss(rng);
        }
    }
    noisy.id = "synthetic-seed" + std::to_string(plan.seed);
    clean.id = noisy.id + "-shadow";

    SyntheticDataset out;
    out.data = PhasedDataset(std::move(noisy), tags);
    out.shadow = PhasedDataset(std::move(clean), tags);
    out.truth = make_file(tool);
    if (build) {
        out.truth.build = build->model;
        out.truth.layout = build->layout;
    }
    out.plan = plan;
    return out;
}

double RecoveryReport::max_relative_error() const {
    double m = 0.0;
    for (const auto& e : errors) m = std::max(m, e.relative);
    return m;
}

bool RecoveryReport::passes(double threshold) const { return exact_support && max_relative_error() < threshold; }

std::string RecoveryReport::text() const {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "jaccard %.4f\nexact_support %s\n", jaccard, exact_support ? "yes" : "no");
    os << buf;
    for (const auto& e : errors) {
        std::snprintf(buf, sizeof buf, "term %-16s truth % .10e found % .10e rel_error %.6e\n", e.term.c_str(),
                      e.truth, e.found, e.relative);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "max_rel_error %.6e\n", max_relative_error());
    os << buf;
    return os.str();
}

RecoveryReport recovery_report(const SparseModel& truth, const SparseModel& found) {
    if (!(truth.library == found.library))
        throw ConfigError("recovery report needs models over the same term library");
    RecoveryReport r;
    const auto a = truth.gamma.indices();
    const auto b = found.gamma.indices();
    std::set<int> sa(a.begin(), a.end()), sb(b.begin(), b.end()), uni = sa;
    uni.insert(sb.begin(), sb.end());
    std::size_t inter = 0;
    for (int p : sa)
        if (sb.count(p)) {
            ++inter;
            TermError e{truth.library.term_name(p), truth.xi[p], found.xi[p], 0.0};
            e.relative = truth.xi[p] != 0.0 ? std::fabs(found.xi[p] - truth.xi[p]) / std::fabs(truth.xi[p])
                                            : std::fabs(found.xi[p]);
            r.errors.push_back(e);
        }
    r.jaccard = uni.empty() ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni.size());
    r.exact_support = sa == sb;
    return r;
}

} // namespace govdisc
