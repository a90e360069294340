#include "doctest.h"

#include "govdisc/error.hpp"
#include "govdisc/pipeline.hpp"
#include "govdisc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace govdisc;

namespace {

const std::filesystem::path kFixtures = GOVDISC_FIXTURES_DIR;

PiecewiseToolModel fixture_tool() { return load_model(kFixtures / "table5_135.model").tool(); }

std::string csv_of(const PhasedDataset& d) {
    std::ostringstream out;
    write_dataset_csv(out, d);
    return out.str();
}

// Refit on the known cooling support; returns the worst relative coefficient error.
double cooling_refit_error(const PiecewiseToolModel& truth, const PhasedDataset& data) {
    auto rows = assemble_regression_set(data, ModelKind::ToolCool, SmootherConfig::moving_average(5));
    auto dm = design_for(rows, {feature::T}, 4);
    auto xi = refit_least_squares(dm, rows.target, truth.cooling.gamma);
    double worst = 0.0;
    for (int p : truth.cooling.gamma.indices())
        worst = std::max(worst, std::abs(xi[static_cast<std::size_t>(p)] - truth.cooling.xi[static_cast<std::size_t>(p)]) /
                                    std::abs(truth.cooling.xi[static_cast<std::size_t>(p)]));
    return worst;
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("default plan timing") {
    ProcessPlan plan;
    CHECK(plan.deposition_duration() == 102.0);
    CHECK(plan.heat_duration() == 122.0);
    CHECK(plan.cycle_duration() == 272.0);
    CHECK(plan.sample_count() == 16 * 272);
}

TEST_CASE("feedstock steps up when deposition starts") {
    ProcessPlan plan;
    auto before = plan_inputs(plan, 1, Stage::Heat, 19.5);
    auto after = plan_inputs(plan, 1, Stage::Heat, 20.0);
    CHECK(before.f_m == doctest::Approx(0.93 * 60));
    CHECK(after.f_m == doctest::Approx(1.93 * 60));
    CHECK(before.omega == 350.0);
    CHECK(plan_inputs(plan, 1, Stage::Heat, 40.0).omega == 135.0);
    auto cool = plan_inputs(plan, 2, Stage::Cool, 5.0);
    CHECK(cool.omega == 0.0);
    CHECK(cool.T_f == 0.0);
    CHECK(cool.s_tool.z == doctest::Approx(2 * 1.52));
}

TEST_CASE("stage boundaries belong to the later stage") {
    ProcessPlan plan;
    CHECK(plan_inputs(plan, 0.0).tag == PhaseTag{1, Stage::Heat});
    CHECK(plan_inputs(plan, plan.heat_duration()).tag == PhaseTag{1, Stage::Cool});
    CHECK(plan_inputs(plan, plan.cycle_duration()).tag == PhaseTag{2, Stage::Heat});
}

TEST_CASE("torque profiles") {
    auto c = TorqueProfile::constant(60);
    CHECK(c.value(3.0, 100.0) == 60.0);
    auto r = TorqueProfile::ripple(60, 0.1, 30);
    double lo = 1e9, hi = -1e9;
    for (double t = 0; t < 60; t += 0.5) {
        lo = std::min(lo, r.value(t, t));
        hi = std::max(hi, r.value(t, t));
    }
    CHECK(lo >= 54.0 - 1e-12);
    CHECK(hi <= 66.0 + 1e-12);
    CHECK(hi - lo > 10.0);
    TorqueProfile ramp;
    ramp.kind = TorqueProfile::Kind::RampThenHold;
    CHECK(ramp.value(0.0, 0.0) == doctest::Approx(30.0));
    CHECK(ramp.value(100.0, 100.0) == 60.0);
}

TEST_CASE("zero layers gives empty trajectories") {
    ProcessPlan plan;
    plan.layers = 0;
    auto ds = generate_ground_truth(fixture_tool(), std::nullopt, plan);
    CHECK(ds.data.size() == 0);
    CHECK(ds.shadow.size() == 0);
}

TEST_CASE("noiseless data equals its shadow and is deterministic") {
    ProcessPlan plan;
    plan.layers = 3;
    auto a = generate_ground_truth(fixture_tool(), std::nullopt, plan);
    CHECK(csv_of(a.data) == csv_of(a.shadow));
    plan.noise = 0.005;
    plan.seed = 42;
    auto b = generate_ground_truth(fixture_tool(), std::nullopt, plan);
    auto c = generate_ground_truth(fixture_tool(), std::nullopt, plan);
    CHECK(csv_of(b.data) == csv_of(c.data));
    CHECK(csv_of(b.shadow) == csv_of(a.shadow));
    CHECK(csv_of(b.data) != csv_of(a.data));
    plan.seed = 43;
    CHECK(csv_of(generate_ground_truth(fixture_tool(), std::nullopt, plan).data) != csv_of(b.data));
}

TEST_CASE("noise touches temperatures only") {
    auto bm = load_model(kFixtures / "build_135.model").build_model();
    ProcessPlan plan;
    plan.layers = 2;
    plan.noise = 0.01;
    auto ds = generate_ground_truth(fixture_tool(), bm, plan);
    for (std::size_t i = 0; i < ds.data.size(); ++i) {
        const auto& n = ds.data.records()[i];
        const auto& s = ds.shadow.records()[i];
        CHECK(n.omega == s.omega);
        CHECK(n.T_f == s.T_f);
        CHECK(n.s_tool == s.s_tool);
    }
    CHECK(ds.truth.build.has_value());
    CHECK(ds.data.has(Channel::T_build4));
}

TEST_CASE("sixteen constant-torque layers peak in a plausible band") {
    ProcessPlan plan;
    plan.torque = TorqueProfile::constant(60.0);
    auto ds = generate_ground_truth(fixture_tool(), std::nullopt, plan);
    double peak = 0.0;
    for (const auto& r : ds.shadow.records()) peak = std::max(peak, r.T_tool);
    CHECK(peak >= 150.0);
    CHECK(peak <= 600.0);
}

TEST_CASE("runaway ground truth names the torque level") {
    ProcessPlan plan;
    plan.layers = 2;
    plan.torque = TorqueProfile::constant(1e6);
    try {
        generate_ground_truth(fixture_tool(), std::nullopt, plan);
        FAIL("expected a plan error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("torque_level") != std::string::npos);
    }
}

TEST_CASE("plan configuration reads known keys and rejects others") {
    std::istringstream good("[plan]\nlayers = 5\ntorque = ripple\ntorque_amplitude = 0.2\ninput_hold = sample\nnoise = 0.01\n");
    auto plan = ProcessPlan::from_config(KvConfig::parse(good, "plan"));
    CHECK(plan.layers == 5);
    CHECK(plan.torque.kind == TorqueProfile::Kind::WithRipple);
    CHECK(plan.torque.amplitude == 0.2);
    CHECK(plan.input_hold == ProcessPlan::InputHold::SampleHold);
    std::istringstream bad("[plan]\nlayer_count = 5\n");
    CHECK_THROWS_AS(ProcessPlan::from_config(KvConfig::parse(bad, "plan")), ConfigError);
    std::istringstream neg("[plan]\ncool_duration = -1\n");
    CHECK_THROWS_AS(ProcessPlan::from_config(KvConfig::parse(neg, "plan")), ConfigError);
}

TEST_CASE("recovery report examples") {
    auto a = make_model({"T"}, 4, {{{0}, 1.0}, {{1}, 2.0}, {{2}, 3.0}});
    auto same = recovery_report(a, a);
    CHECK(same.jaccard == 1.0);
    CHECK(same.exact_support);
    CHECK(same.max_relative_error() == 0.0);

    auto b = make_model({"T"}, 4, {{{0}, 1.1}, {{1}, 2.0}, {{3}, 3.0}});
    auto half = recovery_report(a, b);
    CHECK(half.jaccard == 0.5);
    CHECK_FALSE(half.exact_support);
    CHECK(half.errors.size() == 2);
    CHECK(half.max_relative_error() == doctest::Approx(0.1));
    CHECK_FALSE(half.passes(0.2));

    auto c = make_model({"T"}, 4, {{{4}, 1.0}});
    CHECK(recovery_report(a, c).jaccard == 0.0);
    CHECK_THROWS_AS(recovery_report(a, make_model({"T"}, 3, {})), ConfigError);
}

TEST_CASE("noiseless cooling discovery without ridge recovers the generating equation") {
    auto truth = fixture_tool();
    ProcessPlan plan;
    plan.torque = TorqueProfile::ripple(60, 0.1, 30);
    auto ds = generate_ground_truth(truth, std::nullopt, plan);
    DiscoverySpec spec;
    spec.kind = ModelKind::ToolCool;
    spec.hp.k = 3;
    spec.hp.lambda2 = 0.0;
    spec.smoother = SmootherConfig::none();
    auto found = discover_submodel(ds.data, spec);
    auto rep = recovery_report(truth.cooling, found);
    CHECK(rep.exact_support);
    CHECK(rep.passes(0.01));
}

TEST_CASE("coefficient error grows with noise on average") {
    auto truth = fixture_tool();
    double mean[3] = {0, 0, 0};
    const double sigmas[3] = {0.0, 0.005, 0.02};
    const int seeds = 10;
    for (int s = 0; s < 3; ++s)
        for (int seed = 1; seed <= seeds; ++seed) {
            ProcessPlan plan;
            plan.layers = 8;
            plan.noise = sigmas[s];
            plan.seed = static_cast<std::uint64_t>(seed);
            mean[s] += cooling_refit_error(truth, generate_ground_truth(truth, std::nullopt, plan).data) / seeds;
        }
    MESSAGE("mean cooling refit error: " << mean[0] << " " << mean[1] << " " << mean[2]);
    CHECK(mean[0] <= mean[1]);
    CHECK(mean[1] <= mean[2]);
}

}
