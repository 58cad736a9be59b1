#include <doctest.h>

#include <sstream>

#include "spatialfair/core.hpp"
#include "test_support.hpp"

using namespace spatialfair;

namespace {

Dataset parse(const std::string& text, MeasureMode mode = MeasureMode::statistical_parity) {
    std::istringstream in(text);
    return read_dataset(in, mode);
}

std::vector<Observation> labelled_rows(int n, int label_ones) {
    std::vector<Observation> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        rows[i].id = "r" + std::to_string(i);
        rows[i].lon = i;
        rows[i].lat = -i;
        rows[i].outcome = static_cast<std::uint8_t>(i % 2);
        rows[i].label = static_cast<std::uint8_t>(i < label_ones ? 1 : 0);
    }
    return rows;
}

}  // namespace

TEST_CASE("load: all-positive four rows") {
    const auto d = parse("id,lon,lat,outcome\na,0,0,1\nb,1,0,1\nc,0,1,1\nd,1,1,1\n");
    CHECK(d.size() == 4);
    CHECK(d.positives() == 4);
    CHECK(d.rho() == 1.0);
    CHECK(d.bbox() == Region{0, 0, 1, 1, std::nullopt});
}

TEST_CASE("load: invalid outcome names its line") {
    const std::string csv =
        "id,lon,lat,outcome\n"
        "a,0,0,1\nb,0,0,0\nc,0,0,1\nd,0,0,0\ne,0,0,1\n"
        "f,0,0,2\n";
    try {
        parse(csv);
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        CHECK(e.line() == 7);
        CHECK(std::string(e.what()).find("line 7") != std::string::npos);
    }
}

TEST_CASE("load: malformed rows") {
    CHECK_THROWS_AS(parse("id,lon,lat\na,0,0\n"), DataError);
    CHECK_THROWS_AS(parse("id,lon,lat,outcome\na,0,0\n"), DataError);
    CHECK_THROWS_AS(parse("id,lon,lat,outcome\na,zero,0,1\n"), DataError);
    CHECK_THROWS_AS(parse("id,lon,lat,outcome\na,0,nan,1\n"), DataError);
    CHECK_THROWS_AS(parse("id,lon,lat,outcome\n"), DataError);
    CHECK_THROWS_AS(parse(""), DataError);
}

TEST_CASE("load: equal opportunity keeps true positives only") {
    const auto d = parse(
        "id,lon,lat,outcome,label\n"
        "a,0,0,1,1\nb,1,0,0,1\nc,2,0,1,0\nd,3,0,1,1\ne,4,0,0,0\n",
        MeasureMode::equal_opportunity);
    CHECK(d.size() == 3);
    CHECK(d.positives() == 2);
    CHECK(d.rho() == doctest::Approx(2.0 / 3.0));
    CHECK(d.bbox().xmax == 3.0);
}

TEST_CASE("load: modes needing labels reject rows without one") {
    const std::string csv = "id,lon,lat,outcome,label\na,0,0,1,1\nb,1,0,0,\n";
    CHECK_THROWS_AS(parse(csv, MeasureMode::equal_opportunity), DataError);
    CHECK_THROWS_AS(parse("id,lon,lat,outcome\na,0,0,1\n", MeasureMode::predictive_equality), DataError);
    CHECK(parse(csv).size() == 2);
}

TEST_CASE("load: empty after filtering") {
    CHECK_THROWS_AS(parse("id,lon,lat,outcome,label\na,0,0,1,1\n", MeasureMode::predictive_equality), DataError);
}

TEST_CASE("apply_measure_mode") {
    const auto rows = labelled_rows(10, 6);
    SUBCASE("equal opportunity keeps label 1") {
        const auto out = apply_measure_mode(rows, MeasureMode::equal_opportunity);
        REQUIRE(out.size() == 6);
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i].id == rows[i].id);
    }
    SUBCASE("predictive equality keeps label 0") {
        const auto out = apply_measure_mode(rows, MeasureMode::predictive_equality);
        REQUIRE(out.size() == 4);
        CHECK(out.front().id == "r6");
        CHECK(out.back().id == "r9");
    }
    SUBCASE("statistical parity is the identity") {
        const auto out = apply_measure_mode(rows, MeasureMode::statistical_parity);
        REQUIRE(out.size() == rows.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(out[i].id == rows[i].id);
            CHECK(out[i].outcome == rows[i].outcome);
        }
        CHECK(apply_measure_mode(out, MeasureMode::statistical_parity).size() == rows.size());
    }
}

TEST_CASE("global_rate") {
    auto make = [](std::size_t n, std::size_t p) {
        std::vector<Observation> rows(n);
        for (std::size_t i = 0; i < p; ++i) rows[i].outcome = 1;
        return Dataset(std::move(rows));
    };
    CHECK(global_rate(make(206418, 127286)) == doctest::Approx(0.6167).epsilon(0.0001 / 0.6167));
    CHECK(global_rate(make(10000, 5000)) == 0.5);
    CHECK(global_rate(make(4, 0)) == 0.0);
}

TEST_CASE("dataset invariants on random data") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> size(1, 200);
        const auto n = static_cast<std::size_t>(size(rng));
        const auto pts = sftest::lattice_points(n, 40, rng);
        const auto outcomes = sftest::coin_flips(n, 0.3, rng);
        const Dataset d(sftest::make_rows(pts, outcomes));
        std::int64_t sum = 0;
        for (auto v : outcomes) sum += v;
        CHECK(d.positives() == sum);
        CHECK(std::abs(d.rho() * static_cast<double>(n) - static_cast<double>(sum)) < 1e-9);
        // Tight bbox: every side touches at least one observation.
        const auto& b = d.bbox();
        auto touches = [&](auto pred) { return std::any_of(pts.begin(), pts.end(), pred); };
        CHECK(touches([&](const Point& p) { return p.x == b.xmin; }));
        CHECK(touches([&](const Point& p) { return p.x == b.xmax; }));
        CHECK(touches([&](const Point& p) { return p.y == b.ymin; }));
        CHECK(touches([&](const Point& p) { return p.y == b.ymax; }));
        for (const auto& p : pts) CHECK((p.x >= b.xmin && p.x <= b.xmax && p.y >= b.ymin && p.y <= b.ymax));
    }
}

TEST_CASE("csv write/read preserves observations") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coord(-180.0, 180.0);
    std::vector<Observation> rows(100);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = {"id" + std::to_string(i), coord(rng), coord(rng) / 2, static_cast<std::uint8_t>(i % 3 == 0),
                   i % 5 == 0 ? std::optional<std::uint8_t>{} : std::optional<std::uint8_t>(i % 2)};
    }
    std::stringstream buf;
    write_csv(buf, rows);
    const auto back = parse_csv(buf);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].id == rows[i].id);
        CHECK(back[i].lon == rows[i].lon);
        CHECK(back[i].lat == rows[i].lat);
        CHECK(back[i].outcome == rows[i].outcome);
        CHECK(back[i].label == rows[i].label);
    }
}

TEST_CASE("measure mode names") {
    CHECK(parse_measure_mode("parity") == MeasureMode::statistical_parity);
    CHECK(parse_measure_mode("opportunity") == MeasureMode::equal_opportunity);
    CHECK(parse_measure_mode("predictive-equality") == MeasureMode::predictive_equality);
    CHECK_THROWS_AS(parse_measure_mode("accuracy"), std::invalid_argument);
}
