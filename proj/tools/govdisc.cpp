// govdisc: ingest process logs, discover governing equations, simulate and
// validate them. Exit codes: 0 ok, 1 validation failed, 2 config/schema,
// 3 data, 4 numerical.
#include "CLI11.hpp"

#include "govdisc/error.hpp"
#include "govdisc/fsutil.hpp"
#include "govdisc/govmodel.hpp"
#include "govdisc/log.hpp"
#include "govdisc/metrics.hpp"
#include "govdisc/parallel.hpp"
#include "govdisc/pipeline.hpp"
#include "govdisc/simulate.hpp"
#include "govdisc/svgplot.hpp"
#include "govdisc/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#ifndef GOVDISC_VERSION
#define GOVDISC_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace govdisc;

namespace {

// Empty means "not given", which manifests record explicitly.
const CLI::Validator kOptionalFile(
    [](std::string& path) { return path.empty() ? std::string() : CLI::ExistingFile(path); }, "FILE");

struct LayerRange {
    int first = 0;
    int last = 0;
};

LayerRange parse_range(const std::string& text, const std::string& what) {
    auto parts = split(text, '-');
    if (parts.size() == 1) {
        int l = static_cast<int>(parse_int(parts[0], what));
        return {l, l};
    }
    if (parts.size() != 2) throw ConfigError(what + ": expected 'first-last', got '" + text + "'");
    return {static_cast<int>(parse_int(parts[0], what)), static_cast<int>(parse_int(parts[1], what))};
}

// Options shared by every command that reads a process log.
struct DataOpts {
    std::string data;
    std::string schema;
    std::string segment = "detect";
    std::string layers;

    void add(CLI::App* app, bool layers_flag = true) {
        app->add_option("--data", data, "process log CSV")->required()->check(CLI::ExistingFile);
        app->add_option("--schema", schema, "column mapping config (default: canonical names)")
            ->check(kOptionalFile);
        app->add_option("--segment", segment, "phase tagging: columns, auto or detect")
            ->check(CLI::IsMember({"columns", "auto", "detect"}));
        if (layers_flag) app->add_option("--layers", layers, "keep layers 'first-last'");
    }

    PhasedDataset load() const {
        Schema sch = schema.empty() ? Schema::canonical() : Schema::load(schema);
        Dataset ds = load_dataset(fs::path(data), sch);
        SegmentationRule rule = SegmentationRule::columns();
        if (segment == "auto" || (segment == "detect" && !ds.column_tags)) rule = SegmentationRule::automatic();
        auto phased = segment_phases(ds, rule);
        if (!layers.empty()) {
            auto r = parse_range(layers, "--layers");
            phased = select_layers(phased, r.first, r.last);
        }
        return phased;
    }
};

// Run manifest next to the primary output: resolved options, input checksums
// and the tool version.
class Manifest {
public:
    Manifest(CLI::App& root, CLI::App& cmd, int argc, char** argv) : root_(root), cmd_(cmd) {
        for (int i = 0; i < argc; ++i) argv_ += (i ? " " : "") + std::string(argv[i]);
    }
    void input(const std::string& role, const std::string& path) {
        if (path.empty()) return;
        inputs_.push_back({role, path + " crc32=" + crc32_hex(read_file(path))});
    }
    void output(const std::string& role, const fs::path& path) { outputs_.push_back({role, path.string()}); }

    void write(const fs::path& path) const {
        std::ostringstream out;
        // Provenance lines are comments so the file doubles as a --config input.
        out << "# govdisc-manifest 1\n";
        out << "# version " << GOVDISC_VERSION << "\n";
        out << "# command " << cmd_.get_name() << "\n";
        out << "# argv " << argv_ << "\n";
        out << "# worker threads " << thread_count() << "\n";
        for (const auto& [k, v] : inputs_) out << "# input " << k << " " << v << "\n";
        for (const auto& [k, v] : outputs_) out << "# output " << k << " " << v << "\n";
        out << "# resolved options, defaults included; usable as a --config file\n";
        out << "threads=" << root_.get_option("--threads")->as<int>() << "\n";
        out << "[" << cmd_.get_name() << "]\n" << cmd_.config_to_str(true, false);
        write_file_atomic(path, out.str());
    }

private:
    CLI::App& root_;
    CLI::App& cmd_;
    std::string argv_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<std::pair<std::string, std::string>> outputs_;
};

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
    fs::path out = p;
    out += suffix;
    return out;
}

std::string layer_file(const std::string& stem, int layer, const std::string& ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03d.%s", stem.c_str(), layer, ext.c_str());
    return buf;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestCmd {
    DataOpts d;
    std::string out;
};

int run_ingest(const IngestCmd& c, Manifest& m) {
    auto data = c.d.load();
    std::cout << "dataset   " << data.id() << "\n";
    std::cout << "records   " << data.size() << "\n";
    std::cout << "layers    " << data.first_layer() << "-" << data.last_layer() << "\n";
    if (data.size() > 0)
        std::cout << "time      " << data.records().front().t << " .. " << data.records().back().t << " s\n";
    std::cout << "channels ";
    for (int ch = 0; ch < kChannelCount; ++ch)
        if (data.has(static_cast<Channel>(ch))) std::cout << " " << channel_name(static_cast<Channel>(ch));
    std::cout << "\n";
    std::size_t heat = 0;
    for (const auto& t : data.tags()) heat += t.stage == Stage::Heat;
    std::cout << "heat/cool " << heat << "/" << data.size() - heat << " samples\n";

    m.input("data", c.d.data);
    m.input("schema", c.d.schema);
    if (!c.out.empty()) {
        std::ostringstream csv;
        write_dataset_csv(csv, data);
        write_file_atomic(c.out, csv.str());
        m.output("dataset", c.out);
        m.write(with_suffix(c.out, ".manifest"));
    }
    return 0;
}

// ---------------------------------------------------------------------------
// discover

struct DiscoverCmd {
    DataOpts d;
    std::string kind = "tool-cool";
    std::vector<int> k{3};
    double lambda2 = 100.0;
    double big_m = 1000.0;
    int degree = 4;
    std::string features; // comma separated
    std::string smoother = "ma";
    int window = 5;
    std::vector<int> sensors{1, 2, 3};
    std::string validate_layers;
    std::string solver = "auto";
    std::string model;
    std::string out;
    std::string report;
    int substeps = 10;
};

ModelKind kind_of(const std::string& s) {
    if (s == "tool-heat") return ModelKind::ToolHeat;
    if (s == "tool-cool") return ModelKind::ToolCool;
    return ModelKind::Build;
}

int run_discover(const DiscoverCmd& c, Manifest& m) {
    auto full = c.d.load();
    PhasedDataset train = full;
    // The validation window is taken from the whole log, before --layers.
    if (!c.d.layers.empty()) {
        DataOpts all = c.d;
        all.layers.clear();
        full = all.load();
    }

    DiscoverySpec spec;
    spec.kind = kind_of(c.kind);
    for (const auto& f : split(c.features, ','))
        if (!trim(f).empty()) spec.features.push_back(trim(f));
    spec.smoother = c.smoother == "none" ? SmootherConfig::none() : SmootherConfig::moving_average(c.window);
    spec.sensors = c.sensors;
    spec.solver.method = c.solver == "exhaustive"        ? SolverMethod::Exhaustive
                         : c.solver == "branch-and-bound" ? SolverMethod::BranchAndBound
                                                          : SolverMethod::Auto;

    ModelFile file;
    if (!c.model.empty()) {
        file = load_model(c.model);
        m.input("model", c.model);
    }

    std::vector<HyperParams> candidates;
    for (int k : c.k) {
        HyperParams hp;
        hp.k = k;
        hp.lambda2 = c.lambda2;
        hp.big_m = c.big_m;
        hp.max_degree = c.degree;
        hp.validate();
        candidates.push_back(hp);
    }
    if (candidates.empty()) throw ConfigError("--k needs at least one value");

    std::map<int, SparseModel> fitted;
    auto fit = [&](const HyperParams& hp) -> const SparseModel& {
        auto it = fitted.find(hp.k);
        if (it != fitted.end()) return it->second;
        DiscoverySpec s = spec;
        s.hp = hp;
        return fitted.emplace(hp.k, discover_submodel(train, s)).first->second;
    };

    TuneResult tuning;
    const bool tuned = candidates.size() > 1;
    if (tuned) {
        if (c.validate_layers.empty())
            throw ConfigError("several --k values need a validation window (--validate-layers first-last)");
        auto r = parse_range(c.validate_layers, "--validate-layers");
        PhasedDataset window = select_layers(full, r.first, r.last);
        IntegratorConfig icfg;
        icfg.substeps = c.substeps;
        std::function<double(const HyperParams&)> score;
        if (spec.kind == ModelKind::Build) {
            score = [&](const HyperParams& hp) {
                BuildModel bm{fit(hp), file.layout.value_or(window.layout())};
                return build_validation_mape(bm, window, spec.sensors, icfg);
            };
        } else {
            const bool heat = spec.kind == ModelKind::ToolHeat;
            const auto& partner = heat ? file.cooling : file.heating;
            if (!partner)
                throw ConfigError(std::string("tuning needs the ") + (heat ? "cooling" : "heating") +
                                  " submodel; pass it with --model");
            score = [&, heat](const HyperParams& hp) {
                PiecewiseToolModel tool = heat ? PiecewiseToolModel{fit(hp), *partner}
                                               : PiecewiseToolModel{*partner, fit(hp)};
                return tool_validation_mape(tool, window, icfg);
            };
        }
        tuning = tune_k(candidates, score);
    } else {
        tuning.best = candidates.front();
    }
    const SparseModel& best = fit(tuning.best);

    switch (spec.kind) {
    case ModelKind::ToolHeat: file.heating = best; break;
    case ModelKind::ToolCool: file.cooling = best; break;
    case ModelKind::Build:
        file.build = best;
        if (!file.layout) file.layout = full.layout();
        break;
    }
    file.set_meta("dataset", full.id());
    file.set_meta(std::string(model_kind_name(spec.kind)) + ".source", c.d.data);

    const std::string title = std::string(model_kind_name(spec.kind)) + " model from " + full.id();
    const std::string text = fit_report(best, title, tuned ? &tuning : nullptr);
    std::cout << pretty_print(best) << "\n";

    const fs::path out = c.out;
    const fs::path report = c.report.empty() ? with_suffix(out, ".report.txt") : fs::path(c.report);
    save_model(file, out);
    write_file_atomic(report, text);
    m.input("data", c.d.data);
    m.input("schema", c.d.schema);
    m.output("model", out);
    m.output("report", report);
    m.write(with_suffix(out, ".manifest"));
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateCmd {
    DataOpts d;
    std::string model;
    int type = 2;
    std::string stage = "both";
    double T0 = NAN;
    int substeps = 10;
    bool build = false;
    std::string tool_source = "measured";
    std::string tool_model; // heating+cooling when --model holds only a build model
    bool freeze_d = false;
    int map = 0;
    double wall_length = 216.0;
    std::string out = "sim";
};

LineChart chart_of(const SimulationResult& r, const std::string& title, std::size_t begin, std::size_t end) {
    LineChart ch;
    ch.title = title;
    PlotSeries meas{"measured", {}, {}, "#444444", false};
    PlotSeries pred{"predicted", {}, {}, "#d62728", true};
    for (std::size_t i = begin; i < end; ++i) {
        meas.x.push_back(r.t[i]);
        meas.y.push_back(r.measured[i]);
        pred.x.push_back(r.t[i]);
        pred.y.push_back(r.predicted[i]);
        if (i > begin && r.tags[i].layer != r.tags[i - 1].layer) ch.vertical_rules.push_back(r.t[i]);
    }
    ch.series = {meas, pred};
    return ch;
}

void write_result_files(const SimulationResult& r, const fs::path& dir, const std::string& stem, bool per_layer) {
    std::ostringstream csv;
    write_trajectory_csv(csv, r);
    write_file_atomic(dir / (stem + ".csv"), csv.str());
    write_file_atomic(dir / (stem + ".svg"), render_svg(chart_of(r, stem, 0, r.size())));
    if (!per_layer) return;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= r.size(); ++i) {
        if (i < r.size() && r.tags[i].layer == r.tags[begin].layer) continue;
        const int layer = r.tags[begin].layer;
        SimulationResult part;
        part.t.assign(r.t.begin() + static_cast<long>(begin), r.t.begin() + static_cast<long>(i));
        part.measured.assign(r.measured.begin() + static_cast<long>(begin), r.measured.begin() + static_cast<long>(i));
        part.predicted.assign(r.predicted.begin() + static_cast<long>(begin), r.predicted.begin() + static_cast<long>(i));
        part.tags.assign(r.tags.begin() + static_cast<long>(begin), r.tags.begin() + static_cast<long>(i));
        std::ostringstream lc;
        write_trajectory_csv(lc, part);
        write_file_atomic(dir / layer_file(stem + "_layer", layer, "csv"), lc.str());
        write_file_atomic(dir / layer_file(stem + "_layer", layer, "svg"),
                          render_svg(chart_of(r, stem + " layer " + std::to_string(layer), begin, i)));
        begin = i;
    }
}

void write_tables(const fs::path& dir, std::span<const ComparisonRun> runs) {
    auto rows = comparison_table(runs);
    std::ostringstream csv, text;
    write_table_csv(csv, rows);
    write_table_text(text, rows);
    write_file_atomic(dir / "table.csv", csv.str());
    write_file_atomic(dir / "table.txt", text.str());
    std::cout << text.str();
}

int run_simulate(const SimulateCmd& c, Manifest& m) {
    auto file = load_model(c.model);
    auto data = c.d.load();
    const fs::path dir = c.out;
    IntegratorConfig icfg;
    icfg.substeps = c.substeps;
    m.input("model", c.model);
    m.input("data", c.d.data);
    m.input("schema", c.d.schema);
    const std::string name = fs::path(c.model).stem().string();

    if (!c.build) {
        auto tool = file.tool();
        SimulationResult r;
        if (c.type == 1) {
            StageFilter f = c.stage == "heat" ? StageFilter::Heat : c.stage == "cool" ? StageFilter::Cool : StageFilter::Both;
            r = simulate_type1(tool, data, f, icfg);
        } else {
            const double T0 = std::isfinite(c.T0) ? c.T0 : 24.0;
            r = simulate_type2(tool, data, T0, icfg);
        }
        if (r.diverged) log::warn("tool simulation diverged at t=" + std::to_string(*r.divergence_time) + " s");
        write_result_files(r, dir, "tool", true);
        std::vector<ComparisonRun> runs{{name + " type " + std::to_string(c.type), r.measured, r.predicted, r.seconds}};
        write_tables(dir, runs);
        m.output("trajectory", dir / "tool.csv");
    } else {
        auto bm = file.build_model();
        const auto source = parse_tool_source(c.tool_source);
        std::optional<PiecewiseToolModel> tool;
        if (source == ToolSource::Simulated) {
            tool = c.tool_model.empty() ? file.tool() : load_model(c.tool_model).tool();
            m.input("tool-model", c.tool_model);
        }
        const double T0 = std::isfinite(c.T0) ? c.T0 : 24.0;
        auto drive = make_build_drive(data, source, tool ? &*tool : nullptr, T0, icfg);
        BuildOptions opts;
        opts.freeze_d_on_cool = c.freeze_d;
        opts.integrator = icfg;
        std::cout << "tool source: " << tool_source_name(source) << "\n";

        std::vector<Vec3> locs(bm.layout.locations.begin(), bm.layout.locations.end());
        std::vector<double> seeds;
        for (int s = 0; s < kSensorCount; ++s) {
            const auto ch = static_cast<Channel>(static_cast<int>(Channel::T_build1) + s);
            double v = data.has(ch) && data.size() ? data.records().front().T_build[static_cast<std::size_t>(s)] : NAN;
            seeds.push_back(std::isfinite(v) ? v : T0);
        }
        auto results = simulate_build(bm, drive, locs, seeds, opts);
        std::vector<ComparisonRun> runs;
        for (int s = 0; s < kSensorCount; ++s) {
            auto& r = results[static_cast<std::size_t>(s)];
            const auto ch = static_cast<Channel>(static_cast<int>(Channel::T_build1) + s);
            if (data.has(ch)) r.measured = data.channel(ch);
            const std::string stem = "ktc" + std::to_string(s + 1);
            if (r.diverged) log::warn(stem + " diverged at t=" + std::to_string(*r.divergence_time) + " s");
            write_result_files(r, dir, stem, false);
            m.output(stem, dir / (stem + ".csv"));
            if (data.has(ch)) runs.push_back({name + " " + stem, r.measured, r.predicted, r.seconds});
        }
        if (!runs.empty()) write_tables(dir, runs);

        if (c.map > 0) {
            auto mlocs = centerline_locations(c.map, c.wall_length, bm.layout);
            std::vector<double> mseed{seeds.front()};
            auto map = simulate_build(bm, drive, mlocs, mseed, opts);
            std::ostringstream csv;
            csv << "timestamp";
            for (const auto& l : mlocs) csv << ",x=" << l.x;
            csv << "\n";
            char buf[32];
            for (std::size_t i = 0; i < drive.t.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", drive.t[i]);
                csv << buf;
                for (const auto& r : map) {
                    std::snprintf(buf, sizeof buf, "%.17g", r.predicted[i]);
                    csv << "," << buf;
                }
                csv << "\n";
            }
            write_file_atomic(dir / "map.csv", csv.str());
            m.output("map", dir / "map.csv");
        }
    }
    m.write(dir / "manifest.txt");
    return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthCmd {
    std::string plan;
    std::string tool;
    std::string build;
    std::string out;
    std::string shadow;
    std::string truth;
    int layers = 16;
    double noise = 0.0;
    std::uint64_t seed = 1;
    std::string input_hold = "continuous";
};

int run_synth(const SynthCmd& c, CLI::App& cmd, Manifest& m) {
    ProcessPlan plan = c.plan.empty() ? ProcessPlan{} : ProcessPlan::from_config(KvConfig::load(c.plan));
    // Explicit flags win over the plan file.
    if (cmd.count("--layers")) plan.layers = c.layers;
    if (cmd.count("--noise")) plan.noise = c.noise;
    if (cmd.count("--seed")) plan.seed = c.seed;
    if (cmd.count("--input-hold"))
        plan.input_hold = c.input_hold == "sample" ? ProcessPlan::InputHold::SampleHold : ProcessPlan::InputHold::Continuous;
    plan.validate();

    auto tool_file = load_model(c.tool);
    std::optional<BuildModel> build;
    if (!c.build.empty()) build = load_model(c.build).build_model();
    auto ds = generate_ground_truth(tool_file.tool(), build, plan);

    std::ostringstream csv;
    write_dataset_csv(csv, ds.data);
    write_file_atomic(c.out, csv.str());
    m.input("plan", c.plan);
    m.input("tool", c.tool);
    m.input("build", c.build);
    m.output("dataset", c.out);
    if (!c.shadow.empty()) {
        std::ostringstream sh;
        write_dataset_csv(sh, ds.shadow);
        write_file_atomic(c.shadow, sh.str());
        m.output("shadow", c.shadow);
    }
    if (!c.truth.empty()) {
        save_model(ds.truth, c.truth);
        m.output("truth", c.truth);
    }
    std::cout << "wrote " << ds.data.size() << " samples over " << plan.layers << " layers to " << c.out << "\n";
    m.write(with_suffix(c.out, ".manifest"));
    return 0;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateCmd {
    std::string truth;
    std::string model;
    double threshold = 1.0; // percent
    std::string out;
};

int run_validate(const ValidateCmd& c) {
    auto truth = load_model(c.truth);
    auto found = load_model(c.model);
    std::ostringstream text;
    bool ok = true;
    int compared = 0;
    auto check = [&](const char* name, const std::optional<SparseModel>& a, const std::optional<SparseModel>& b) {
        if (!a || !b) return;
        ++compared;
        auto rep = recovery_report(*a, *b);
        const bool pass = rep.passes(c.threshold / 100.0);
        ok = ok && pass;
        text << "[" << name << "] " << (pass ? "PASS" : "FAIL") << "\n" << rep.text() << "\n";
    };
    check("heating", truth.heating, found.heating);
    check("cooling", truth.cooling, found.cooling);
    check("build", truth.build, found.build);
    if (compared == 0) throw ConfigError("the two model files share no submodel");
    char buf[64];
    std::snprintf(buf, sizeof buf, "threshold %g%%\n", c.threshold);
    text << buf << (ok ? "recovered" : "not recovered") << "\n";
    std::cout << text.str();
    if (!c.out.empty()) write_file_atomic(c.out, text.str());
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// report

struct ReportCmd {
    std::string trajectory;
    std::string out;
    std::string title;
    int layer = 0;
};

int run_report(const ReportCmd& c) {
    std::istringstream in(read_file(c.trajectory));
    std::string line;
    if (!std::getline(in, line) || trim(line) != "timestamp,measured,predicted,layer,stage")
        throw DataError(c.trajectory + ": not a trajectory CSV (expected header timestamp,measured,predicted,layer,stage)");
    SimulationResult r;
    auto num = [](const std::string& s) { return trim(s).empty() ? NAN : parse_double(s, "trajectory value"); };
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 5) throw DataError(c.trajectory + ": row " + std::to_string(row) + " has " +
                                           std::to_string(f.size()) + " fields");
        PhaseTag tag{static_cast<int>(parse_int(f[3], "layer")), parse_stage(trim(f[4]))};
        if (c.layer && tag.layer != c.layer) continue;
        r.t.push_back(num(f[0]));
        r.measured.push_back(num(f[1]));
        r.predicted.push_back(num(f[2]));
        r.tags.push_back(tag);
    }
    if (r.t.empty()) throw DataError(c.trajectory + ": no rows selected");
    const std::string title = c.title.empty() ? fs::path(c.trajectory).stem().string() : c.title;
    write_file_atomic(c.out, render_svg(chart_of(r, title, 0, r.size())));
    const auto score = mape(r.measured, r.predicted);
    std::printf("MAPE %.4f%% over %zu samples (%zu skipped)\n", score.value, score.n_used, score.n_skipped);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discover, simulate and validate thermal governing equations from process logs"};
    app.option_defaults()->always_capture_default();
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_version_flag("--version", GOVDISC_VERSION);
    app.set_config("--config", "", "INI file with one [command] section per subcommand; flags win");
    app.config_formatter(std::make_shared<CLI::ConfigINI>());
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "cap on worker threads (also GOVDISC_THREADS)")->check(CLI::NonNegativeNumber);

    IngestCmd ingest;
    auto* c_ingest = app.add_subcommand("ingest", "load a log, tag phases and print a summary");
    ingest.d.add(c_ingest);
    c_ingest->add_option("--out", ingest.out, "write the canonical CSV here");

    DiscoverCmd disc;
    auto* c_disc = app.add_subcommand("discover", "fit one submodel by exact sparse regression");
    disc.d.add(c_disc);
    c_disc->add_option("--kind", disc.kind, "tool-heat, tool-cool or build")
        ->check(CLI::IsMember({"tool-heat", "tool-cool", "build"}));
    c_disc->add_option("--k", disc.k, "support size; several values are tuned on --validate-layers");
    c_disc->add_option("--lambda2", disc.lambda2, "ridge weight")->check(CLI::NonNegativeNumber);
    c_disc->add_option("--big-m", disc.big_m, "coefficient bound")->check(CLI::PositiveNumber);
    c_disc->add_option("--degree", disc.degree, "maximum monomial degree")->check(CLI::NonNegativeNumber);
    c_disc->add_option("--features", disc.features, "library features, comma separated, state first (default per kind)");
    c_disc->add_option("--smoother", disc.smoother, "ma or none")->check(CLI::IsMember({"ma", "none"}));
    c_disc->add_option("--window", disc.window, "moving-average window (odd)");
    c_disc->add_option("--sensors", disc.sensors, "thermocouples stacked for build fits");
    c_disc->add_option("--validate-layers", disc.validate_layers, "window for k tuning, 'first-last'");
    c_disc->add_option("--solver", disc.solver, "auto, exhaustive or branch-and-bound")
        ->check(CLI::IsMember({"auto", "exhaustive", "branch-and-bound"}));
    c_disc->add_option("--substeps", disc.substeps, "RK4 steps per sample during tuning")->check(CLI::PositiveNumber);
    c_disc->add_option("--model", disc.model, "existing model file to merge into")->check(kOptionalFile);
    c_disc->add_option("--out", disc.out, "model file to write")->required();
    c_disc->add_option("--report", disc.report, "fit report path (default <out>.report.txt)");

    SimulateCmd sim;
    auto* c_sim = app.add_subcommand("simulate", "run a model against a log");
    sim.d.add(c_sim);
    c_sim->add_option("--model", sim.model, "model file")->required()->check(CLI::ExistingFile);
    c_sim->add_option("--type", sim.type, "1: per-segment from measured seeds, 2: whole run")
        ->check(CLI::IsMember({1, 2}));
    c_sim->add_option("--stage", sim.stage, "type 1 stages: heat, cool or both")
        ->check(CLI::IsMember({"heat", "cool", "both"}));
    c_sim->add_option("--T0", sim.T0, "initial tool temperature for type 2 (default 24)");
    c_sim->add_option("--substeps", sim.substeps, "RK4 steps per sample")->check(CLI::PositiveNumber);
    c_sim->add_flag("--build", sim.build, "simulate the build model at the thermocouples");
    c_sim->add_option("--tool-source", sim.tool_source, "measured or simulated tool temperature")
        ->check(CLI::IsMember({"measured", "simulated"}));
    c_sim->add_option("--tool-model", sim.tool_model, "tool model for --tool-source simulated (default: --model)")
        ->check(kOptionalFile);
    c_sim->add_flag("--freeze-d-on-cool", sim.freeze_d, "hold the distance at its last heating value while cooling");
    c_sim->add_option("--map", sim.map, "also simulate this many centerline locations")->check(CLI::NonNegativeNumber);
    c_sim->add_option("--wall-length", sim.wall_length, "centerline length for --map (mm)")->check(CLI::PositiveNumber);
    c_sim->add_option("--out", sim.out, "output directory");

    SynthCmd syn;
    auto* c_syn = app.add_subcommand("synth", "generate a synthetic log from known equations");
    c_syn->add_option("--plan", syn.plan, "process plan config")->check(kOptionalFile);
    c_syn->add_option("--tool", syn.tool, "model file with heating and cooling")->required()->check(CLI::ExistingFile);
    c_syn->add_option("--build-model", syn.build, "model file with a build submodel")->check(kOptionalFile);
    c_syn->add_option("--out", syn.out, "dataset CSV")->required();
    c_syn->add_option("--shadow", syn.shadow, "also write the noiseless dataset");
    c_syn->add_option("--truth", syn.truth, "also write the generating model file");
    c_syn->add_option("--layers", syn.layers, "override plan layers")->check(CLI::NonNegativeNumber);
    c_syn->add_option("--noise", syn.noise, "relative temperature noise sigma")->check(CLI::NonNegativeNumber);
    c_syn->add_option("--seed", syn.seed, "noise seed");
    c_syn->add_option("--input-hold", syn.input_hold, "continuous or sample")
        ->check(CLI::IsMember({"continuous", "sample"}));

    ValidateCmd val;
    auto* c_val = app.add_subcommand("validate", "compare a discovered model with the truth; exit 1 on mismatch");
    c_val->add_option("--truth", val.truth, "generating model file")->required()->check(CLI::ExistingFile);
    c_val->add_option("--model", val.model, "discovered model file")->required()->check(CLI::ExistingFile);
    c_val->add_option("--threshold", val.threshold, "largest accepted coefficient error, percent")
        ->check(CLI::NonNegativeNumber);
    c_val->add_option("--out", val.out, "write the recovery report here");

    ReportCmd rep;
    auto* c_rep = app.add_subcommand("report", "plot a trajectory CSV as SVG");
    c_rep->add_option("--trajectory", rep.trajectory, "CSV from simulate")->required()->check(CLI::ExistingFile);
    c_rep->add_option("--out", rep.out, "SVG path")->required();
    c_rep->add_option("--title", rep.title, "chart title");
    c_rep->add_option("--layer", rep.layer, "zoom into one layer");

    std::string stamp_path, show_path;
    auto* c_stamp = app.add_subcommand("stamp", "rewrite the checksum of a hand-edited model file");
    c_stamp->add_option("--model", stamp_path, "model file")->required()->check(CLI::ExistingFile);
    auto* c_show = app.add_subcommand("show", "print the equations in a model file");
    c_show->add_option("--model", show_path, "model file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitCode::Config);
    }

    try {
        if (threads > 0) set_thread_cap(threads);
        CLI::App* cmd = app.get_subcommands().front();
        Manifest manifest(app, *cmd, argc, argv);
        if (cmd == c_ingest) return run_ingest(ingest, manifest);
        if (cmd == c_disc) return run_discover(disc, manifest);
        if (cmd == c_sim) return run_simulate(sim, manifest);
        if (cmd == c_syn) return run_synth(syn, *c_syn, manifest);
        if (cmd == c_val) return run_validate(val);
        if (cmd == c_rep) return run_report(rep);
        if (cmd == c_stamp) {
            write_file_atomic(stamp_path, restamp_model(read_file(stamp_path)));
            parse_model(read_file(stamp_path), stamp_path);
            std::cout << "stamped " << stamp_path << "\n";
            return 0;
        }
        if (cmd == c_show) {
            std::cout << pretty_print(load_model(show_path));
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        // Anything else is an I/O failure in practice (filesystem, streams).
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::Data);
    }
    return 0;
}
