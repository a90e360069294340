// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// "info" lines carry supporting numbers. Run with criterion numbers as
// arguments to select a subset.

#include "govdisc/error.hpp"
#include "govdisc/featlib.hpp"
#include "govdisc/govmodel.hpp"
#include "govdisc/log.hpp"
#include "govdisc/metrics.hpp"
#include "govdisc/pipeline.hpp"
#include "govdisc/simulate.hpp"
#include "govdisc/sparsereg.hpp"
#include "govdisc/synth.hpp"

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace govdisc;

namespace {

const std::string kFixtures = GOVDISC_FIXTURES_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

void info(const std::string& s) { std::printf("    info: %s\n", s.c_str()); }

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PiecewiseToolModel fixture_tool() { return load_model(kFixtures + "/table5_135.model").tool(); }
BuildModel fixture_build() { return load_model(kFixtures + "/build_135.model").build_model(); }

ProcessPlan ripple_plan(int layers) {
    ProcessPlan p;
    p.layers = layers;
    p.torque = TorqueProfile::ripple(60.0, 0.10, 30.0);
    return p;
}

std::string support_text(const SparseModel& m) {
    std::string s = "{";
    for (int p : m.gamma.indices()) s += (s.size() > 1 ? ", " : "") + m.library.term_name(p);
    return s + "}";
}

// Discovers one submodel and scores it against the truth. Exceptions count as
// a failed recovery and are reported.
struct Recovery {
    bool ok = false;
    bool exact = false;
    double max_err = INFINITY;
    double seconds = 0.0;
    std::string text;
    SparseModel model;
};

Recovery recover(const PhasedDataset& data, const SparseModel& truth, DiscoverySpec spec) {
    Recovery r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r.model = discover_submodel(data, spec);
        r.seconds = seconds_since(t0);
        auto rep = recovery_report(truth, r.model);
        r.ok = true;
        r.exact = rep.exact_support;
        r.max_err = rep.exact_support ? rep.max_relative_error() : INFINITY;
        r.text = support_text(r.model);
        if (rep.exact_support) r.text += fmt(" max rel err %.3e", rep.max_relative_error());
    } catch (const Error& e) {
        r.seconds = seconds_since(t0);
        r.text = std::string("error: ") + e.what();
    }
    return r;
}

DiscoverySpec spec_for(ModelKind kind, double lambda2, int k, SmootherConfig smoother) {
    DiscoverySpec s;
    s.kind = kind;
    s.hp.k = k;
    s.hp.lambda2 = lambda2;
    s.hp.big_m = 1000.0;
    s.hp.max_degree = 4;
    s.smoother = smoother;
    return s;
}

// ---------------------------------------------------------------- 1, 2

Outcome tool_recovery(ModelKind kind) {
    const auto truth_tool = fixture_tool();
    const SparseModel& truth = kind == ModelKind::ToolHeat ? truth_tool.heating : truth_tool.cooling;
    const auto clean = generate_ground_truth(truth_tool, std::nullopt, ripple_plan(16));

    auto spec = spec_for(kind, 100.0, 3, SmootherConfig::none());
    Recovery r = recover(clean.data, truth, spec);
    info(fmt("noiseless, lambda2=100: %s (%.3f s)", r.text.c_str(), r.seconds));
    bool pass = r.exact && r.max_err < 0.01 && r.seconds < 30.0;
    std::string detail = fmt("noiseless exact=%s max_err=%.3e time=%.2fs", r.exact ? "yes" : "no", r.max_err, r.seconds);

    if (kind == ModelKind::ToolCool) {
        double root = NAN;
        if (r.exact) {
            // b1 + b2 T + b3 T^2 = 0 with b3 < 0: the positive root.
            const auto& xi = r.model.xi;
            const double c0 = xi[0], c1 = xi[1], c2 = xi[2];
            const double disc = c1 * c1 - 4.0 * c2 * c0;
            for (double s : {-1.0, 1.0}) {
                double x = (-c1 + s * std::sqrt(disc)) / (2.0 * c2);
                if (x > 0.0) root = x;
            }
        }
        info(fmt("equilibrium root of recovered cooling law: %.4f degC (target 24.06 +/- 0.25)", root));
        pass = pass && std::fabs(root - 24.06) <= 0.25;
        detail += fmt(" root=%.4f", root);
    }

    // Noisy repeats (0.5% multiplicative), moving-average smoothing.
    int exact = 0;
    bool coeffs_ok = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto plan = ripple_plan(16);
        plan.noise = 0.005;
        plan.seed = seed;
        const auto noisy = generate_ground_truth(truth_tool, std::nullopt, plan);
        Recovery n = recover(noisy.data, truth, spec_for(kind, 100.0, 3, SmootherConfig::moving_average(5)));
        info(fmt("sigma=0.5%% seed %llu, lambda2=100: %s", static_cast<unsigned long long>(seed), n.text.c_str()));
        Recovery z = recover(noisy.data, truth, spec_for(kind, 0.0, 3, SmootherConfig::moving_average(5)));
        info(fmt("supplementary sigma=0.5%% seed %llu, lambda2=0: %s", static_cast<unsigned long long>(seed),
                 z.text.c_str()));
        if (n.exact) {
            ++exact;
            coeffs_ok = coeffs_ok && n.max_err < 0.15;
        }
    }
    pass = pass && exact >= 4 && coeffs_ok;
    detail += fmt("; noisy exact %d/5 coeffs<15%% %s", exact, coeffs_ok ? "yes" : "no");

    // Supplementary: the same noiseless data without the ridge term.
    Recovery z = recover(clean.data, truth, spec_for(kind, 0.0, 3, SmootherConfig::none()));
    info(fmt("supplementary noiseless, lambda2=0: %s", z.text.c_str()));
    return {pass, detail};
}

// ---------------------------------------------------------------- 3

Outcome build_recovery() {
    const auto tool = fixture_tool();
    const auto build = fixture_build();
    const auto syn = generate_ground_truth(tool, build, ripple_plan(16));

    auto run = [&](double lambda2, bool report) -> Outcome {
        auto spec = spec_for(ModelKind::Build, lambda2, 4, SmootherConfig::none());
        spec.sensors = {1, 2, 3};
        Recovery r = recover(syn.data, build.model, spec);
        info(fmt("build, lambda2=%g: %s (%.3f s)", lambda2, r.text.c_str(), r.seconds));
        if (!r.ok) return {false, r.text};
        BuildModel found{r.model, build.layout};
        auto drive = make_build_drive(syn.data, ToolSource::Measured);
        std::vector<Vec3> locs(build.layout.locations.begin(), build.layout.locations.end());
        const double t0[] = {syn.plan.ambient};
        auto sims = simulate_build(found, drive, locs, t0);
        double train = 0.0, test = NAN;
        std::string per;
        bool diverged = false;
        for (int j = 0; j < kSensorCount; ++j) {
            diverged = diverged || sims[j].diverged;
            auto meas = syn.data.channel(static_cast<Channel>(static_cast<int>(Channel::T_build1) + j));
            double m = NAN;
            try {
                m = mape(meas, sims[j].predicted).value;
            } catch (const Error&) {
            }
            per += fmt(" KTC%d=%.4f%%", j + 1, m);
            if (j < 3) train += m / 3.0;
            else test = m;
        }
        info(fmt("build, lambda2=%g: Type II MAPE%s%s", lambda2, per.c_str(), diverged ? " (diverged)" : ""));
        const bool ok = r.exact && !diverged && test <= 2.0 * train;
        if (!report) return {ok, {}};
        return {ok, fmt("exact=%s held-out MAPE %.4f%% vs 2x train mean %.4f%%", r.exact ? "yes" : "no", test,
                        2.0 * train)};
    };
    Outcome main = run(100.0, true);
    run(0.0, false);
    return main;
}

// ---------------------------------------------------------------- 4

Outcome solver_exactness() {
    std::mt19937_64 rng(20240607);
    std::normal_distribution<double> g(0.0, 1.0);
    int mismatches = 0, card = 0, bigm = 0;
    double worst = 0.0;
    for (int prob = 0; prob < 100; ++prob) {
        const int N = 200;
        const int P = 2 + static_cast<int>(rng() % 11); // 2..12
        const int k = 1 + static_cast<int>(rng() % std::min(4, P));
        const double lambda2 = prob % 2 ? 100.0 : 0.0;

        DesignMatrix dm;
        dm.library = build_library({"u"}, 0);
        dm.values.resize(N, P);
        for (int c = 0; c < P; ++c) {
            for (int i = 0; i < N; ++i) dm.values(i, c) = g(rng);
            if (c > 0 && rng() % 3 == 0) dm.values.col(c) += 0.9 * dm.values.col(c - 1); // correlated columns
            dm.column_names.push_back("c" + std::to_string(c));
        }
        std::vector<double> y(N);
        for (int i = 0; i < N; ++i) {
            double v = 0.1 * g(rng);
            for (int c = 0; c < std::min(P, 3); ++c) v += (c + 1) * dm.values(i, (c * 5) % P);
            y[i] = v;
        }
        HyperParams hp;
        hp.k = k;
        hp.lambda2 = lambda2;
        auto np = normalize_columns(dm, y);
        auto ex = solve_support(np, hp, {SolverMethod::Exhaustive, Execution::Parallel, 0});
        auto bb = solve_support(np, hp, {SolverMethod::BranchAndBound, Execution::Serial, 0});
        if (!(ex.support == bb.support)) ++mismatches;
        const double rel = std::fabs(ex.objective - bb.objective) / std::max(std::fabs(ex.objective), 1e-300);
        worst = std::max(worst, rel);
        if (rel > 1e-10) ++mismatches;
        for (SolverMethod m : {SolverMethod::Exhaustive, SolverMethod::BranchAndBound}) {
            auto model = discover(dm, y, hp, {m, Execution::Parallel, 0});
            if (model.gamma.count() != static_cast<std::size_t>(k)) ++card;
            for (double x : model.xi)
                if (std::fabs(x) > hp.big_m) ++bigm;
        }
    }
    return {mismatches == 0 && card == 0 && bigm == 0,
            fmt("100 problems: support/objective mismatches %d, worst rel objective gap %.2e, cardinality "
                "violations %d, big-M violations %d",
                mismatches, worst, card, bigm)};
}

// ---------------------------------------------------------------- 5

Outcome integrator() {
    auto run = [](int substeps) {
        std::vector<double> t(101);
        for (int i = 0; i <= 100; ++i) t[i] = i;
        IntegratorConfig cfg;
        cfg.substeps = substeps;
        auto tr = integrate_segment([](double T, std::span<const double>) { return -0.0135 * T; }, 100.0, t, {}, 0,
                                    cfg);
        return tr.values.back();
    };
    const double exact = 100.0 * std::exp(-1.35);
    const double v10 = run(10);
    const double e1 = std::fabs(run(1) - exact), e2 = std::fabs(run(2) - exact), e4 = std::fabs(run(4) - exact);
    const double r12 = e1 / e2, r24 = e2 / e4;
    info(fmt("T(100) substeps 10 = %.9f, closed form %.9f", v10, exact));
    info(fmt("errors h=1: %.3e  h=1/2: %.3e  h=1/4: %.3e", e1, e2, e4));
    const bool pass = std::fabs(v10 - exact) <= 1e-6 && std::fabs(v10 - 25.924) < 5e-4 && r12 >= 12.0 && r12 <= 20.0;
    return {pass, fmt("|T(100) - 25.924...| = %.2e, error ratio on halving h = %.2f (next %.2f)",
                      std::fabs(v10 - exact), r12, r24)};
}

// ---------------------------------------------------------------- 6

Outcome type2_coupling() {
    const auto tool = fixture_tool();
    auto plan = ripple_plan(6);
    const auto syn = generate_ground_truth(tool, std::nullopt, plan);
    auto a = simulate_type2(tool, syn.data, 24.0);
    auto b = simulate_type2(tool, syn.data, 24.0);
    double gap = 0.0;
    for (std::size_t s = 0; s + 1 < a.segments.size(); ++s) {
        const double g = std::fabs(a.segments[s].end_value - a.segments[s + 1].start_value);
        if (!(g == 0.0)) gap = std::max(gap, std::isfinite(g) ? g : INFINITY);
    }
    const bool same = a.predicted.size() == b.predicted.size() &&
                      std::memcmp(a.predicted.data(), b.predicted.data(), a.predicted.size() * sizeof(double)) == 0;
    return {gap == 0.0 && same && a.segments.size() == 12 && !a.diverged,
            fmt("%zu segments, max boundary gap %.3g, repeat bit-identical %s", a.segments.size(), gap,
                same ? "yes" : "no")};
}

// ---------------------------------------------------------------- 7

Outcome runtime() {
    const auto tool = fixture_tool();
    auto plan = ripple_plan(30);
    plan.cool_duration = 128.0; // 250 s cycles: 7500 samples over 30 layers
    const auto syn = generate_ground_truth(tool, std::nullopt, plan);
    auto r = simulate_type2(tool, syn.data, 24.0);
    return {r.seconds < 1.5 && !r.diverged && syn.data.size() == 7500,
            fmt("%zu samples, 30 layers, core Type II integration %.4f s", syn.data.size(), r.seconds)};
}

// ---------------------------------------------------------------- 8

Outcome mape_checks() {
    const std::vector<double> x{100.0, 200.0, 35.5, 24.0};
    const double self = mape(x, x).value;
    const std::vector<double> m{100.0, 200.0}, p{90.0, 220.0};
    const double ten = mape(m, p).value;
    std::vector<double> sx, sp;
    const std::vector<double> X{101.0, 250.0, 37.5, 24.3}, Y{99.0, 260.0, 30.0, 25.1};
    for (std::size_t i = 0; i < X.size(); ++i) {
        sx.push_back(3.7 * X[i]);
        sp.push_back(3.7 * Y[i]);
    }
    const double base = mape(X, Y).value, scaled = mape(sx, sp).value;
    const double drift = std::fabs(base - scaled) / base;
    return {self == 0.0 && ten == 10.0 && drift <= 1e-12,
            fmt("mape(X,X)=%g, [100,200] vs [90,220] = %.17g%%, scale 3.7 relative drift %.2e", self, ten, drift)};
}

// ---------------------------------------------------------------- 9

Outcome centerline_map() {
    const auto tool = fixture_tool();
    const auto build = fixture_build();
    const auto syn = generate_ground_truth(tool, build, ripple_plan(16));
    auto drive = make_build_drive(syn.data, ToolSource::Measured);
    const auto locs = centerline_locations(53, syn.plan.wall_length, build.layout);
    const double t0[] = {syn.plan.ambient};
    auto sims = simulate_build(build, drive, locs, t0);

    // Nearest/farthest by time-averaged distance to the tool.
    std::size_t near = 0, far = 0;
    double dmin = INFINITY, dmax = -INFINITY;
    for (std::size_t j = 0; j < locs.size(); ++j) {
        auto d = distance_series(drive, locs[j], false);
        double mean = 0.0;
        for (double v : d) mean += v / static_cast<double>(d.size());
        if (mean < dmin) dmin = mean, near = j;
        if (mean > dmax) dmax = mean, far = j;
    }
    auto peak = [&](std::size_t j) {
        std::size_t arg = 0;
        for (std::size_t i = 0; i < sims[j].predicted.size(); ++i)
            if (sims[j].predicted[i] > sims[j].predicted[arg]) arg = i;
        return std::pair<double, double>{sims[j].predicted[arg], sims[j].t[arg]};
    };
    int diverged = 0;
    for (const auto& s : sims) diverged += s.diverged;
    auto [pn, tn] = peak(near);
    auto [pf, tf] = peak(far);
    info(fmt("nearest x=%.1f mm (mean d %.1f): peak %.2f degC at t=%.0f s", locs[near].x, dmin, pn, tn));
    info(fmt("farthest x=%.1f mm (mean d %.1f): peak %.2f degC at t=%.0f s", locs[far].x, dmax, pf, tf));
    const bool count_ok = sims.size() == 53 && diverged == 0;
    const bool order_ok = tn <= tf && pn >= pf;
    return {count_ok && order_ok, fmt("%zu trajectories (%d diverged); nearest peaks %s and %s than farthest",
                                      sims.size(), diverged, tn <= tf ? "no later" : "later",
                                      pn >= pf ? "no lower" : "lower")};
}

// ---------------------------------------------------------------- 10

Outcome round_trips() {
    bool ok = true;
    std::string detail;
    for (const char* name : {"table5_135.model", "table5_115.model", "table5_135_115.model", "build_135.model"}) {
        auto m = load_model(kFixtures + "/" + name);
        auto again = parse_model(serialize_model(m));
        ok = ok && again == m;
    }
    // A discovered model carries diagnostics too.
    const auto tool = fixture_tool();
    const auto syn = generate_ground_truth(tool, fixture_build(), ripple_plan(3));
    auto cool = discover_submodel(syn.data, spec_for(ModelKind::ToolCool, 100.0, 3, SmootherConfig::none()));
    ModelFile mf;
    mf.cooling = cool;
    mf.set_meta("dataset", syn.data.id());
    const bool disc_ok = parse_model(serialize_model(mf)) == mf;
    ok = ok && disc_ok;
    detail += fmt("model files equal after save/load: %s", ok ? "yes" : "no");

    std::ostringstream csv;
    write_dataset_csv(csv, syn.data);
    std::istringstream in(csv.str());
    auto loaded = load_dataset(in, Schema::canonical(), "roundtrip");
    auto phased = segment_phases(loaded, SegmentationRule::columns());
    std::size_t data_rows = 0;
    for (char c : csv.str()) data_rows += c == '\n';
    data_rows -= 1;
    bool same = phased.size() == syn.data.size() && phased.tags() == syn.data.tags();
    for (std::size_t i = 0; same && i < phased.size(); ++i)
        for (int c = 0; c < kChannelCount; ++c) {
            const Channel ch = static_cast<Channel>(c);
            if (!syn.data.has(ch)) continue;
            const double a = phased.records()[i].get(ch), b = syn.data.records()[i].get(ch);
            if (!(a == b)) same = false;
        }
    const std::size_t skipped = data_rows - phased.size();
    ok = ok && same && skipped == 0;
    detail += fmt("; synthetic CSV %zu rows ingested, %zu skipped, values identical %s", phased.size(), skipped,
                  same ? "yes" : "no");
    return {ok, detail};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    log::set_sink([](const std::string&) {});
    const std::vector<Criterion> all = {
        {1, "heating-equation recovery", [] { return tool_recovery(ModelKind::ToolHeat); }},
        {2, "cooling-equation recovery", [] { return tool_recovery(ModelKind::ToolCool); }},
        {3, "build-equation recovery and extrapolation", build_recovery},
        {4, "solver exactness", solver_exactness},
        {5, "integrator correctness", integrator},
        {6, "Type II coupling invariant", type2_coupling},
        {7, "simulation runtime", runtime},
        {8, "MAPE unit checks", mape_checks},
        {9, "1D centerline map", centerline_map},
        {10, "round-trips", round_trips},
    };
    std::set<int> want;
    for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : all) {
        if (!want.empty() && !want.count(c.id)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("unexpected error: ") + e.what()};
        }
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
