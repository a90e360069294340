#include "doctest.h"

#include "govdisc/error.hpp"
#include "govdisc/metrics.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace govdisc;

TEST_SUITE("metrics") {

TEST_CASE("identical series score zero") {
    std::vector<double> x{20, 150, 300.5};
    auto r = mape(x, x);
    CHECK(r.value == 0.0);
    CHECK(r.n_used == 3);
}

TEST_CASE("hand example of ten percent") {
    std::vector<double> m{100, 200}, p{90, 220};
    CHECK(mape(m, p).value == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("zero and non-finite samples are skipped and counted") {
    std::vector<double> m{0, 100, NAN, 50}, p{5, 110, 20, NAN};
    auto r = mape(m, p);
    CHECK(r.n_used == 1);
    CHECK(r.n_skipped == 3);
    CHECK(r.value == doctest::Approx(10.0));
    std::vector<double> z{0, 0}, q{1, 1};
    CHECK_THROWS_AS(mape(z, q), DataError);
    std::vector<double> shorter{1};
    CHECK_THROWS_AS(mape(z, shorter), DataError);
}

TEST_CASE("scale invariance, positivity and asymmetry") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(10, 500), c(0.01, 100);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(20), y(20);
        for (auto& v : x) v = u(rng);
        for (auto& v : y) v = u(rng);
        double k = c(rng);
        std::vector<double> kx(x), ky(y);
        for (auto& v : kx) v *= k;
        for (auto& v : ky) v *= k;
        double base = mape(x, y).value;
        CHECK(mape(kx, ky).value == doctest::Approx(base).epsilon(1e-12));
        CHECK(base > 0.0);
    }
    std::vector<double> a{100}, b{50};
    CHECK(mape(a, b).value == doctest::Approx(50.0));
    CHECK(mape(b, a).value == doctest::Approx(100.0));
}

TEST_CASE("comparison tables") {
    CHECK(comparison_table({}).empty());
    std::vector<ComparisonRun> runs{{"type1", {100, 200}, {90, 220}, 0.5}, {"type2", {100, 200}, {100, 200}, 0.25}};
    auto rows = comparison_table(runs);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].mape == doctest::Approx(10.0));
    CHECK(rows[1].mape == 0.0);
    std::ostringstream csv, text;
    write_table_csv(csv, rows);
    write_table_text(text, rows);
    CHECK(csv.str().find("type1") != std::string::npos);
    CHECK(text.str().find("type2") != std::string::npos);
}

}
