#include "doctest.h"

#include "govdisc/error.hpp"
#include "govdisc/govmodel.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

using namespace govdisc;

namespace {

const std::filesystem::path kFixtures = GOVDISC_FIXTURES_DIR;

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
    auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

SparseModel random_model(std::mt19937_64& rng, const std::vector<std::string>& features, int degree) {
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_int_distribution<int> ex(-12, 3);
    auto lib = build_library(features, degree);
    std::vector<std::pair<std::vector<int>, double>> terms;
    for (const auto& t : lib.terms())
        if (terms.empty() || rng() % 3 == 0) terms.push_back({t.exponents, u(rng) * std::pow(10.0, ex(rng))});
    auto m = make_model(features, degree, terms);
    m.hp.k = static_cast<int>(terms.size());
    m.hp.lambda2 = u(rng) + 1.0;
    m.diag.stage1_objective = u(rng) * 1e-3 + 1e-3;
    m.diag.stage2_residual_norm = 1.0 / 3.0;
    m.diag.condition_estimate = 12345.678901234567;
    m.diag.solver = "exhaustive";
    m.diag.supports_evaluated = 6545;
    m.diag.seconds = 0.1 + u(rng);
    return m;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

} // namespace

TEST_SUITE("govmodel") {

TEST_CASE("published tool coefficients load and print their term sets") {
    auto file = load_model(kFixtures / "table5_135.model");
    REQUIRE(file.has_tool());
    CHECK(file.meta("dataset") == std::optional<std::string>("135-rpm"));
    CHECK(file.meta("coefficient_order").has_value());
    CHECK(pretty_print(*file.cooling) == "dT/dt = +3.2820e-1 −1.3500e-2·T −6.0601e-6·T^2");
    CHECK(pretty_print(*file.heating) == "dT/dt = −1.8361e-9·T^3·ω +1.1382e-8·T·ω^2·T_f +2.7640e-9·ω^3·T_f");
    for (const char* name : {"table5_115.model", "table5_135_115.model"}) {
        auto other = load_model(kFixtures / name);
        CHECK(other.heating->gamma == file.heating->gamma);
        CHECK(other.cooling->gamma == file.cooling->gamma);
    }
}

TEST_CASE("build fixture prints four terms in library order") {
    auto file = load_model(kFixtures / "build_135.model");
    auto bm = file.build_model();
    CHECK(pretty_print(bm.model) ==
          "dT_build/dt = −4.6003e-6·T_tool·d^2 +4.3869e-8·d^3 −6.3398e-10·T_build^4 +2.1208e-7·T_tool^2·d^2");
    CHECK(bm.layout.locations[0] == Vec3{27, 0, -2.54});
}

TEST_CASE("empty support prints as zero") {
    auto m = make_model({"T"}, 2, {});
    CHECK(pretty_print(m) == "dT/dt = 0");
}

TEST_CASE("tool right-hand side examples") {
    auto tool = load_model(kFixtures / "table5_135.model").tool();
    // 2.7640e-9*135^3*10 + 1.1382e-8*135^2*10*100 - 1.8361e-9*135*100^3
    const double heat = 2.7640e-9 * 24603750.0 + 1.1382e-8 * 18225000.0 - 1.8361e-9 * 135000000.0;
    CHECK(heat == doctest::Approx(0.02757).epsilon(1e-3));
    double r = rhs_tool(tool, Stage::Heat, 100.0, {{"ω", 135.0}, {"T_f", 10.0}});
    CHECK(r == doctest::Approx(heat).epsilon(1e-14));
    CHECK(rhs_tool(tool, Stage::Heat, 100.0, {{"omega", 135.0}, {"T_f", 10.0}}) == r);
    CHECK(rhs_tool(tool, Stage::Cool, 0.0, {}) == doctest::Approx(0.3282).epsilon(1e-15));

    const double b1 = 0.3282, b2 = 0.0135, b3 = 6.0601e-6;
    const double root = (-b2 + std::sqrt(b2 * b2 + 4 * b3 * b1)) / (2 * b3);
    CHECK(root == doctest::Approx(24.06).epsilon(1e-3));
    CHECK(std::abs(rhs_tool(tool, Stage::Cool, root, {})) < 1e-12);

    CHECK_THROWS_AS(rhs_tool(tool, Stage::Heat, 100.0, {{"ω", 135.0}}), DataError);
}

TEST_CASE("cooling is negative above and positive below equilibrium") {
    auto tool = load_model(kFixtures / "table5_135.model").tool();
    for (double T = 24.1 + 1e-9; T < 1500; T += 0.37) CHECK(rhs_tool(tool, Stage::Cool, T, {}) < 0.0);
    for (double T = 0.0; T < 24.0; T += 0.013) CHECK(rhs_tool(tool, Stage::Cool, T, {}) > 0.0);
}

TEST_CASE("build right-hand side examples") {
    auto bm = load_model(kFixtures / "build_135.model").build_model();
    CHECK(rhs_build(bm, 100.0, 0.0, 0.0) == doctest::Approx(-6.3398e-2).epsilon(1e-14));
    CHECK(rhs_build(bm, 0.0, 0.0, 10.0) == doctest::Approx(4.3869e-8 * 1000).epsilon(1e-14));
    CHECK(rhs_build(bm, 57.0, 0.0, 0.0) == doctest::Approx(-6.3398e-10 * std::pow(57.0, 4)).epsilon(1e-14));
}

TEST_CASE("right-hand sides equal the design row dotted with the coefficients") {
    auto file = load_model(kFixtures / "table5_135.model");
    auto tool = file.tool();
    auto bm = load_model(kFixtures / "build_135.model").build_model();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> T(0, 900), w(0, 400), tf(0, 80), d(0, 250);
    for (int i = 0; i < 500; ++i) {
        double row[3] = {T(rng), w(rng), tf(rng)};
        auto dm = evaluate_library(tool.heating.library, std::vector<std::vector<double>>{{row[0]}, {row[1]}, {row[2]}});
        double dot = 0.0;
        for (std::size_t p = 0; p < tool.heating.xi.size(); ++p) dot += dm.values(0, static_cast<Eigen::Index>(p)) * tool.heating.xi[p];
        double r = rhs_tool(tool, Stage::Heat, row[0], {{"ω", row[1]}, {"T_f", row[2]}});
        CHECK(std::abs(r - dot) <= 1e-14 * std::max(1.0, std::abs(dot)) * 10);

        double b[3] = {T(rng), T(rng), d(rng)};
        auto bd = evaluate_library(bm.model.library, std::vector<std::vector<double>>{{b[0]}, {b[1]}, {b[2]}});
        double bdot = 0.0;
        for (std::size_t p = 0; p < bm.model.xi.size(); ++p) bdot += bd.values(0, static_cast<Eigen::Index>(p)) * bm.model.xi[p];
        double rb = rhs_build(bm, b[0], b[1], b[2]);
        CHECK(std::abs(rb - bdot) <= 1e-14 * std::max(1.0, std::abs(bdot)) * 10);
    }
}

TEST_CASE("bound evaluation agrees with the model's own evaluation") {
    auto bm = load_model(kFixtures / "build_135.model").build_model();
    BoundModel bound(bm.model, {"d", "T_build", "T_tool"});
    double slots[3] = {12.5, 310.0, 455.0};
    double direct[3] = {310.0, 455.0, 12.5};
    CHECK(bound(slots) == bm.model.evaluate(direct));
    CHECK_THROWS_AS(BoundModel(bm.model, {"d", "T_build"}), DataError);
}

TEST_CASE("random models survive a save and load with every bit intact") {
    std::mt19937_64 rng(2024);
    auto dir = std::filesystem::temp_directory_path() / "govdisc_test_models";
    for (int trial = 0; trial < 25; ++trial) {
        PiecewiseToolModel tool{random_model(rng, {"T", "ω", "T_f", "f_m"}, 3), random_model(rng, {"T"}, 4)};
        auto file = make_file(tool);
        file.set_meta("dataset", "trial " + std::to_string(trial));
        file.build = random_model(rng, {"T_build", "T_tool", "d"}, 4);
        file.layout = SensorLayout::equally_spaced(200.0 + trial, 3.0);
        auto path = dir / ("m" + std::to_string(trial) + ".model");
        save_model(file, path);
        auto back = load_model(path);
        CHECK(back == file);
        for (std::size_t p = 0; p < file.heating->xi.size(); ++p) CHECK(bit_equal(back.heating->xi[p], file.heating->xi[p]));
        CHECK(serialize_model(back) == serialize_model(file));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("format, version and checksum errors are distinct") {
    auto text = serialize_model(load_model(kFixtures / "table5_135.model"));
    CHECK_NOTHROW(parse_model(text));
    CHECK_THROWS_AS(parse_model(replace_once(text, "govdisc-model 1", "govdisc-model 2")), FormatError);
    CHECK_THROWS_AS(parse_model(replace_once(text, "govdisc-model 1", "other-model 1")), FormatError);

    auto tampered = replace_once(text, "0.3282", "0.3283");
    try {
        parse_model(tampered);
        FAIL("expected corruption error");
    } catch (const CorruptionError&) {
    }
    CHECK_NOTHROW(parse_model(restamp_model(tampered)));

    CHECK_THROWS_AS(parse_model(restamp_model(replace_once(text, "max_degree = 4", "max_degree = 4\ncolour = red"))),
                    FormatError);
    CHECK_THROWS_AS(parse_model(restamp_model(replace_once(text, "[submodel cooling]", "[submodel other]"))),
                    FormatError);
    CHECK_THROWS_AS(parse_model(restamp_model(replace_once(text, "term = 1 | ", "term = ext:sin | "))), FormatError);
}

TEST_CASE("build model requires exactly the build features") {
    ModelFile f;
    f.build = make_model({"T_build", "T_tool"}, 2, {{{1, 0}, 1.0}});
    CHECK_THROWS_AS(f.build_model(), ConfigError);
}

}
