#include "doctest.h"

#include "govdisc/regression_set.hpp"
#include "govdisc/smoothdiff.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace govdisc;

namespace {

std::vector<PhaseTag> one_segment(std::size_t n) { return std::vector<PhaseTag>(n, PhaseTag{1, Stage::Heat}); }

std::vector<double> arange(std::size_t n, double step = 1.0) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = step * static_cast<double>(i);
    return t;
}

} // namespace

TEST_SUITE("smoothdiff") {

TEST_CASE("moving average of a ramp is the ramp except where the window shrinks") {
    std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
    auto s = smooth(x, SmootherConfig::moving_average(5));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(s[i] == doctest::Approx(x[i]));
    std::vector<double> y{0, 0, 10, 0, 0};
    auto sy = smooth(y, SmootherConfig::moving_average(3));
    CHECK(sy[0] == 0.0);
    CHECK(sy[1] == doctest::Approx(10.0 / 3.0));
    CHECK(sy[2] == doctest::Approx(10.0 / 3.0));
    CHECK(sy[4] == 0.0);
}

TEST_CASE("smoother None is the identity") {
    std::vector<double> x{3, 1, 4, 1, 5};
    CHECK(smooth(x, SmootherConfig::none()) == x);
}

TEST_CASE("smoothing never crosses a segment boundary") {
    std::vector<double> x{1, 1, 1, 100, 100, 100};
    std::vector<PhaseTag> tags{{1, Stage::Heat}, {1, Stage::Heat}, {1, Stage::Heat},
                               {1, Stage::Cool}, {1, Stage::Cool}, {1, Stage::Cool}};
    auto s = smooth_by_segment(x, tags, SmootherConfig::moving_average(5));
    for (int i = 0; i < 3; ++i) CHECK(s[i] == 1.0);
    for (int i = 3; i < 6; ++i) CHECK(s[i] == 100.0);
}

TEST_CASE("central differences are exact for quadratics and endpoints are masked") {
    auto t = arange(8, 0.5);
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = 3.0 * t[i] * t[i] - t[i] + 2.0;
    auto d = differentiate(x, t, one_segment(t.size()));
    CHECK_FALSE(d.valid.front());
    CHECK_FALSE(d.valid.back());
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        CHECK(d.valid[i]);
        CHECK(d.values[i] == doctest::Approx(6.0 * t[i] - 1.0).epsilon(1e-12));
    }
    CHECK(d.valid_count() == t.size() - 2);
}

TEST_CASE("non-uniform spacing divides by the full stencil width") {
    std::vector<double> t{0.0, 1.0, 3.0, 4.0};
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = t[i] * t[i];
    auto d = differentiate(x, t, one_segment(t.size()));
    CHECK(d.values[1] == doctest::Approx((9.0 - 0.0) / 3.0).epsilon(1e-12));
    CHECK(d.values[2] == doctest::Approx((16.0 - 1.0) / 3.0).epsilon(1e-12));
}

TEST_CASE("masked fraction is two samples per segment") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<PhaseTag> tags;
        std::size_t segments = 0;
        const int layers = 1 + static_cast<int>(rng() % 5);
        for (int l = 1; l <= layers; ++l)
            for (Stage st : {Stage::Heat, Stage::Cool}) {
                int n = 3 + static_cast<int>(rng() % 7);
                for (int i = 0; i < n; ++i) tags.push_back({l, st});
                ++segments;
            }
        auto t = arange(tags.size());
        std::vector<double> x(tags.size(), 1.0);
        auto d = differentiate(x, t, tags);
        CHECK(tags.size() - d.valid_count() == 2 * segments);
    }
}

TEST_CASE("segments shorter than three samples contribute no valid derivative") {
    std::vector<double> t = arange(5), x{1, 2, 5, 6, 9};
    std::vector<PhaseTag> tags{{1, Stage::Heat}, {1, Stage::Heat}, {1, Stage::Cool}, {1, Stage::Cool}, {1, Stage::Cool}};
    auto d = differentiate(x, t, tags);
    CHECK_FALSE(d.valid[0]);
    CHECK_FALSE(d.valid[1]);
    CHECK(d.valid[3]);
    CHECK(d.values[3] == doctest::Approx(2.0));
}

TEST_CASE("derivative stencils never cross a segment boundary") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int trial = 0; trial < 20; ++trial) {
        auto t = arange(12);
        std::vector<double> x(12);
        for (auto& v : x) v = u(rng);
        std::vector<PhaseTag> tags(12, PhaseTag{1, Stage::Heat});
        for (int i = 6; i < 12; ++i) tags[i].stage = Stage::Cool;
        auto base = differentiate(x, t, tags);
        // Perturbing the second segment leaves the first segment untouched.
        auto y = x;
        for (int i = 6; i < 12; ++i) y[i] += u(rng);
        auto moved = differentiate(y, t, tags);
        for (int i = 0; i < 6; ++i) CHECK(moved.values[i] == base.values[i]);
    }
}

TEST_CASE("tool heat regression rows carry the process inputs at Heat samples") {
    std::string csv = "t,T_tool,omega,T_f,f_m,F_m,layer,stage\n";
    for (int i = 0; i < 8; ++i)
        csv += std::to_string(i) + "," + std::to_string(24 + 2 * i) + ",135,60,115.8,1000,1," + (i < 5 ? "Heat" : "Cool") + "\n";
    std::istringstream in(csv);
    auto ph = segment_phases(load_dataset(in, Schema::canonical()), SegmentationRule::columns());
    auto rs = assemble_regression_set(ph, ModelKind::ToolHeat, SmootherConfig::none());
    REQUIRE(rs.rows() == 3);
    CHECK(rs.names.front() == feature::T);
    CHECK(rs.column(feature::omega)[0] == 135.0);
    for (double v : rs.target) CHECK(v == doctest::Approx(2.0));
    auto cool = assemble_regression_set(ph, ModelKind::ToolCool, SmootherConfig::none());
    CHECK(cool.rows() == 1);
    CHECK(cool.names.size() == 1);
}

}
