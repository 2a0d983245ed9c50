#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "cbias/dirichlet.hpp"
#include "cbias/primes.hpp"
#include "cbias/summation.hpp"

#include <cmath>

using namespace cbias;
using primes::u64;

namespace {
primes::SieveConfig config(u64 limit, unsigned threads = 1, u64 segment = 1 << 16) {
    primes::SieveConfig c;
    c.limit = limit;
    c.thread_count = threads;
    c.segment_size = segment;
    return c;
}
}  // namespace

TEST_CASE("compensated sum recovers small terms lost by naive addition") {
    sums::CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) s.add(1.0);
    s.add(-1e16);
    CHECK(s.result() == 1000.0);
    CHECK(s.count == 1002);
}

TEST_CASE("s = 0 counts around the first crossing mod 4") {
    const auto grid = primes::make_grid_from_points({26860, 26861});
    const auto s = sums::accumulate_series(dirichlet::residue_classifier(4), 0.0, grid, config(26861));
    const auto& c1 = s.column("class:1");
    const auto& c3 = s.column("class:3");
    CHECK(c3[0] >= c1[0]);
    CHECK(c1[1] > c3[1]);
}

TEST_CASE("weighted sums mod 4 at 100 equal brute force") {
    const auto grid = primes::make_grid_from_points({100});
    const auto s = sums::accumulate_series(dirichlet::residue_classifier(4), 0.5, grid, config(100));
    for (u64 a : {1, 3})
        CHECK(std::fabs(s.column(sums::class_column(std::to_string(a)))[0] -
                        oracle::class_sums(4, a, 0.5, {100})[0]) <= 1e-12);
}

TEST_CASE("additivity, monotonicity and thread independence") {
    const auto grid = primes::make_grid(16, 2000000, 1.1);
    const auto cls = dirichlet::residue_classifier(60);
    const auto one = sums::accumulate_series(cls, 0.5, grid, config(2000000, 1));
    const auto all = sums::accumulate_series(sums::all_primes_classifier(), 0.5, grid, config(2000000, 1));
    for (unsigned t : {2u, 4u}) {
        const auto other = sums::accumulate_series(cls, 0.5, grid, config(2000000, t, 1 << 12));
        for (std::size_t c = 0; c < one.columns.size(); ++c) CHECK(one.columns[c].values == other.columns[c].values);
    }
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        double parts = one.column(sums::kExcludedColumn)[i];
        for (const auto& label : cls.labels) parts += one.column(sums::class_column(label))[i];
        CHECK(std::fabs(parts - one.column(sums::kTotalColumn)[i]) <= 1e-12 * std::max(1.0, parts));
        CHECK(std::fabs(one.column(sums::kTotalColumn)[i] - all.column(sums::kTotalColumn)[i]) <= 1e-12);
        if (i)
            for (const auto& col : one.columns) CHECK(col.values[i] >= col.values[i - 1]);
    }
}

TEST_CASE("grid beyond the stream is a contract violation; unordered input too") {
    const auto grid = primes::make_grid(16, 1000, 2.0);
    CHECK_THROWS_AS(sums::accumulate_series(dirichlet::residue_classifier(4), 0.5, grid, config(500)),
                    primes::ContractViolation);
    sums::SeriesAccumulator acc(dirichlet::residue_classifier(4), 0.5, grid);
    acc(7);
    CHECK_THROWS_AS(acc(5), primes::ContractViolation);
}

TEST_CASE("accumulator state round trip") {
    const auto grid = primes::make_grid(16, 100000, 1.2);
    const auto cls = dirichlet::residue_classifier(8);
    sums::SeriesAccumulator full(cls, 0.5, grid);
    sums::SeriesAccumulator first(cls, 0.5, grid);
    const auto ps = oracle::plain_sieve(100000);
    for (u64 p : ps) {
        full(p);
        if (p < 40000) first(p);
    }
    sums::SeriesAccumulator second(cls, 0.5, grid);
    second.load_state(first.save_state());
    for (u64 p : ps)
        if (p >= 40000) second(p);
    const auto a = full.finish(100000), b = second.finish(100000);
    for (std::size_t c = 0; c < a.columns.size(); ++c) CHECK(a.columns[c].values == b.columns[c].values);
}

TEST_CASE("residual series and scales") {
    const auto grid = primes::make_grid(16, 100000, 1.3);
    sums::CheckpointSeries s;
    s.grid = grid;
    std::vector<double> col(grid.points.size());
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = 0.5 * std::log(std::log(double(grid.points[i]))) + 3.0;
    s.add_column("v", col);
    const auto r = sums::residual_series(s, {{"v", 1.0}}, 0.5, sums::Scale::LogLog, "combo", "residual");
    for (double x : r.column("residual")) CHECK(x == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.column("v") == col);
    const auto zero = sums::residual_series(s, {{"v", 1.0}}, 0.0, sums::Scale::LogLog, "", "residual");
    CHECK(zero.column("residual") == col);

    CHECK_THROWS_AS(sums::scale_value(sums::Scale::LogLog, 2.0), std::domain_error);
    CHECK_THROWS_AS(sums::scale_value(sums::Scale::LogN, 0.0), std::domain_error);
    CHECK(sums::scale_value(sums::Scale::LogN, 1.0) == 0.0);

    sums::CheckpointSeries low;
    low.grid = primes::make_grid(2, 100, 2.0);
    low.add_column("v", std::vector<double>(low.size(), 1.0));
    CHECK_THROWS_AS(sums::residual_series(low, {{"v", 1.0}}, 0.5, sums::Scale::LogLog, "", "r"), std::domain_error);
    CHECK_THROWS(sums::residual_series(s, {{"missing", 1.0}}, 0.5, sums::Scale::LogLog, "", "r"));
    CHECK_THROWS_AS(s.add_column("short", {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(s.add_column("v", col), std::invalid_argument);
}

TEST_CASE("slope fits") {
    const auto grid = primes::make_grid(16, 1000000000, 1.2);
    sums::CheckpointSeries s;
    s.grid = grid;
    std::vector<double> line(grid.points.size()), flat(grid.points.size(), 7.0);
    for (std::size_t i = 0; i < line.size(); ++i) line[i] = 0.5 * std::log(std::log(double(grid.points[i]))) + 3.0;
    s.add_column("line", line);
    s.add_column("flat", flat);
    const auto f = sums::fit_loglog_slope(s, "line", 1000);
    CHECK(std::fabs(f.slope - 0.5) <= 1e-9);
    CHECK(std::fabs(f.intercept - 3.0) <= 1e-9);
    CHECK(std::fabs(sums::fit_loglog_slope(s, "flat", 1000).slope) <= 1e-9);
    CHECK_THROWS(sums::fit_slope(s, "line", 900000000));
    CHECK(sums::column_range(s, "flat", 16, 1000000000) == 0.0);
}

TEST_CASE("Mertens residual and empty class") {
    const auto grid = primes::make_grid(1000, 100000000, 1.5);
    const auto all = sums::mertens_residual(sums::all_primes_classifier(), 0, grid, config(100000000, 1, 1 << 22));
    const double last = all.column("mertens_residual:all").back();
    CHECK(std::fabs(last - oracle::mertens_constant()) <= 0.01);

    const auto mod4 = dirichlet::residue_classifier(4);
    const auto r1 = sums::mertens_residual(mod4, 0, grid, config(100000000, 1, 1 << 22));
    CHECK(sums::column_range(r1, "mertens_residual:1", 1000, 100000000) < 0.05);

    sums::PrimeClassifier empty{{"none", "all"}, [](u64) { return 1; }, {0.25, 0.75}};
    const auto e = sums::mertens_residual(empty, 0, primes::make_grid(16, 10000, 2.0), config(10000));
    for (std::size_t i = 0; i < e.size(); ++i)
        CHECK(e.column("mertens_residual:none")[i] == -0.25 * std::log(std::log(double(e.grid.points[i]))));
}

TEST_CASE("density reports") {
    const auto grid = primes::make_grid(1000, 10000000, 2.0);
    const auto mod4 = dirichlet::residue_classifier(4);
    const auto counts = sums::accumulate_series(mod4, 0.0, grid, config(10000000));
    const auto rep = sums::density_report(counts, mod4);
    for (std::size_t k = 0; k < 2; ++k) CHECK(std::fabs(*rep.ratios[k].back() - 0.5) < 0.005);

    const auto one = sums::all_primes_classifier();
    const auto c1 = sums::accumulate_series(one, 0.0, primes::make_grid(16, 1000, 2.0), config(1000));
    const auto rep1 = sums::density_report(c1, one);
    for (const auto& r : rep1.ratios[0]) CHECK(*r == 1.0);

    const auto seven = dirichlet::coset_classifier(7, {6});
    const auto c7 = sums::accumulate_series(seven, 0.0, grid, config(10000000));
    const auto rep7 = sums::density_report(c7, seven);
    for (const auto& r : rep7.ratios) CHECK(std::fabs(*r.back() - 1.0 / 3.0) < 0.02 / 3.0);

    sums::CheckpointSeries zero;
    zero.grid = primes::make_grid_from_points({1});
    zero.metadata["s"] = "0";
    zero.add_column(sums::class_column("1"), {0.0});
    zero.add_column(sums::class_column("3"), {0.0});
    zero.add_column(sums::kExcludedColumn, {0.0});
    zero.add_column(sums::kTotalColumn, {0.0});
    CHECK_FALSE(sums::density_report(zero, mod4).ratios[0][0].has_value());
}

TEST_CASE("race tracker records sign changes including ties") {
    sums::RaceTracker race(4, 3, 1);
    for (u64 p : oracle::primes_trial(30000)) race(p);
    const auto& ev = race.events();
    REQUIRE(ev.size() >= 2);
    CHECK(ev.front().prime == 3);
    CHECK(ev.front().difference == -1);
    CHECK(ev[1].prime == 5);
    CHECK(ev[1].difference == 0);
}
