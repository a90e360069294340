// Serial reference vs OpenMP path for the three parallel kernels.
#include <benchmark/benchmark.h>

#include "govdisc/featlib.hpp"
#include "govdisc/simulate.hpp"
#include "govdisc/sparsereg.hpp"
#include "govdisc/synth.hpp"

#include <random>

using namespace govdisc;

namespace {

const std::filesystem::path kFixtures = GOVDISC_FIXTURES_DIR;

std::vector<std::vector<double>> random_columns(int features, int rows) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(features), std::vector<double>(static_cast<std::size_t>(rows)));
    for (auto& c : cols)
        for (auto& v : c) v = u(rng);
    return cols;
}

Execution exec_of(const benchmark::State& st) { return st.range(0) ? Execution::Parallel : Execution::Serial; }

void BM_EvaluateLibrary(benchmark::State& st) {
    auto lib = build_library({"T", "ω", "T_f"}, 4);
    auto cols = random_columns(3, 20000);
    for (auto _ : st) benchmark::DoNotOptimize(evaluate_library(lib, cols, exec_of(st)).values.data());
}
BENCHMARK(BM_EvaluateLibrary)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_ExhaustiveSolve(benchmark::State& st) {
    auto lib = build_library({"T", "ω", "T_f"}, 4);
    auto cols = random_columns(3, 3000);
    auto dm = evaluate_library(lib, cols);
    std::vector<double> y(dm.rows());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = dm.values(static_cast<Eigen::Index>(i), 7) - 0.5 * dm.values(static_cast<Eigen::Index>(i), 20);
    auto np = normalize_columns(dm, y);
    HyperParams hp;
    hp.k = 3;
    SolverOptions opts;
    opts.method = SolverMethod::Exhaustive;
    opts.exec = exec_of(st);
    for (auto _ : st) benchmark::DoNotOptimize(solve_support(np, hp, opts).objective);
}
BENCHMARK(BM_ExhaustiveSolve)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_SimulateBuildMap(benchmark::State& st) {
    auto tool = load_model(kFixtures / "table5_135.model").tool();
    auto bm = load_model(kFixtures / "build_135.model").build_model();
    ProcessPlan plan;
    plan.layers = 4;
    auto ds = generate_ground_truth(tool, std::nullopt, plan);
    auto drive = make_build_drive(ds.data, ToolSource::Measured);
    auto locs = centerline_locations(53, plan.wall_length, bm.layout);
    std::vector<double> seed{24.0};
    BuildOptions opts;
    opts.exec = exec_of(st);
    for (auto _ : st) benchmark::DoNotOptimize(simulate_build(bm, drive, locs, seed, opts).size());
}
BENCHMARK(BM_SimulateBuildMap)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
