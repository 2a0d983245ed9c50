#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "cbias/primes.hpp"

#include <algorithm>
#include <vector>

using namespace cbias;
using primes::u64;

namespace {
struct Collector {
    std::vector<u64> v;
    void operator()(u64 p) { v.push_back(p); }
};

std::vector<u64> stream(u64 limit, u64 segment = primes::kDefaultSegmentSize, unsigned threads = 1) {
    primes::SieveConfig cfg;
    cfg.limit = limit;
    cfg.segment_size = segment;
    cfg.thread_count = threads;
    return primes::stream_primes(cfg, Collector{}).v;
}
}  // namespace

TEST_CASE("segment [2, 30) holds the ten primes below 30") {
    const auto base = primes::small_primes(5);
    const auto seg = primes::sieve_segment(2, 30, base);
    CHECK(seg.primes() == std::vector<u64>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29});
    CHECK(seg.count() == 10);
}

TEST_CASE("prime counts below 100 and 10^6") {
    CHECK(primes::sieve_segment(2, 100, primes::small_primes(10)).count() == 25);
    primes::SieveConfig cfg;
    cfg.limit = 1000000;
    CHECK(primes::count_primes(cfg) == 78498);
    CHECK(oracle::plain_sieve(1000000).size() == 78498);
}

TEST_CASE("insufficient base primes is a contract violation") {
    const auto base = primes::small_primes(3);
    CHECK_THROWS_AS(primes::sieve_segment(2, 100, base), primes::ContractViolation);
}

TEST_CASE("small streams") {
    CHECK(stream(10).size() == 4);
    const auto v = stream(30);
    CHECK(v.back() == 29);
    CHECK(std::is_sorted(v.begin(), v.end()));
    CHECK(stream(1).empty());
    CHECK(stream(0).empty());
    CHECK(stream(2) == std::vector<u64>{2});
}

TEST_CASE("segmentation and threads never change the sequence") {
    const auto ref = oracle::plain_sieve(1000000);
    CHECK(primes::reference_sieve(1000000) == ref);
    for (u64 seg : {64ULL, 1000ULL, 4096ULL, 1ULL << 22})
        for (unsigned t : {1u, 2u, 4u, 7u}) {
            CAPTURE(seg);
            CAPTURE(t);
            CHECK(stream(1000000, seg, t) == ref);
        }
}

TEST_CASE("any tiling of [2, N) reproduces the unsegmented bitmap") {
    const u64 N = 1000000;
    const auto base = primes::small_primes(primes::isqrt(N));
    std::vector<u64> joined;
    u64 lo = 2;
    u64 step = 777;
    while (lo < N) {
        const u64 hi = std::min(N, lo + step);
        const auto p = primes::sieve_segment(lo, hi, base).primes();
        joined.insert(joined.end(), p.begin(), p.end());
        lo = hi;
        step = step * 3 % 50021 + 64;
    }
    CHECK(joined == oracle::plain_sieve(N - 1));
}

TEST_CASE("pi(N) agrees with trial division for every N <= 10^5") {
    const auto trial = oracle::primes_trial(100000);
    const auto got = stream(100000, 1024, 3);
    CHECK(got == trial);
    // every prefix count follows since both lists are equal and sorted
    for (u64 n : {2ULL, 3ULL, 4ULL, 97ULL, 100ULL, 99991ULL})
        CHECK(std::upper_bound(got.begin(), got.end(), n) - got.begin() ==
              std::upper_bound(trial.begin(), trial.end(), n) - trial.begin());
}

TEST_CASE("boundary hook and resume from a segment boundary") {
    primes::SieveConfig cfg;
    cfg.limit = 100000;
    cfg.segment_size = 1024;
    std::vector<u64> bounds;
    primes::stream_primes(cfg, [](u64) {}, [&](u64 hi) { bounds.push_back(hi); });
    CHECK(bounds.size() == primes::segment_count(cfg));
    CHECK(bounds.back() == 100001);
    for (std::size_t i = 1; i < bounds.size(); ++i) CHECK(bounds[i] > bounds[i - 1]);

    cfg.start = bounds[10];
    const auto tail = primes::stream_primes(cfg, Collector{}).v;
    const auto all = stream(100000);
    std::vector<u64> expect;
    for (u64 p : all)
        if (p >= bounds[10]) expect.push_back(p);
    CHECK(tail == expect);

    cfg.start = 1000;  // not a boundary
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("sieve config validation") {
    primes::SieveConfig cfg;
    cfg.limit = 100;
    cfg.segment_size = 32;
    CHECK_THROWS(cfg.validate());
    cfg.segment_size = 64;
    cfg.thread_count = 0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("checkpoint grids") {
    const auto g = primes::make_grid(10, 1000, 10.0);
    CHECK(g.points == std::vector<u64>{10, 100, 1000});
    CHECK_THROWS_AS(primes::make_grid(2, 2, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(primes::make_grid(10, 100, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(primes::make_grid(1, 100, 1.5), std::invalid_argument);

    const auto big = primes::make_grid(1000, 1000000000, 1.05);
    CHECK(big.points.front() == 1000);
    CHECK(big.points.back() == 1000000000);
    for (std::size_t i = 1; i < big.points.size(); ++i) {
        CHECK(big.points[i] > big.points[i - 1]);
        CHECK(static_cast<double>(big.points[i]) / big.points[i - 1] <= 1.05 + 1e-3);
    }
    CHECK(primes::make_grid(1000, 1000000000, 1.05).points == big.points);

    CHECK_THROWS(primes::make_grid_from_points({}));
    CHECK_THROWS(primes::make_grid_from_points({5, 5}));
    CHECK(primes::make_grid_from_points({3, 9}).x_max == 9);
}
