#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "cbias/tau.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <unistd.h>

using namespace cbias;
using namespace cbias::tau;

namespace {
const DeltaExpansion& table() {
    static const DeltaExpansion d = delta_coefficients(20000);
    return d;
}
i128 ipow(i128 b, int e) {
    i128 r = 1;
    while (e--) r *= b;
    return r;
}
}  // namespace

TEST_CASE("first coefficients") {
    const auto& d = table();
    CHECK(d[1] == 1);
    CHECK(d[2] == -24);
    CHECK(d[3] == 252);
    CHECK(d[4] == -1472);
    CHECK(d[5] == 4830);
    CHECK(d[0] == 0);
}

TEST_CASE("two routes agree up to 5000") {
    const auto alt = oracle::tau_pentagonal(5000);
    for (u64 n = 1; n <= 5000; ++n) CHECK(table()[n] == alt[n]);
}

TEST_CASE("serial and parallel squaring agree") {
    const auto a = jacobi_series(3000);
    const auto a2 = square_i64(a, 3000, false);
    CHECK(a2 == square_i64(a, 3000, true));
    CHECK(square_wide(a2, 3000, false) == square_wide(a2, 3000, true));
    CHECK(delta_coefficients(3000, false).tau == delta_coefficients(3000, true).tau);
}

TEST_CASE("Ramanujan congruence mod 691") {
    for (u64 n = 1; n <= 1000; ++n) {
        auto r = static_cast<long long>(table()[n] % 691);
        if (r < 0) r += 691;
        CHECK(static_cast<u64>(r) == oracle::sigma11_mod691(n));
    }
}

TEST_CASE("multiplicativity and the Hecke recursion") {
    const auto& d = table();
    for (u64 m = 2; m <= 140; ++m)
        for (u64 n = m + 1; m * n <= 20000; n += 3)
            if (std::gcd(m, n) == 1) CHECK(d[m * n] == d[m] * d[n]);
    for (u64 p : oracle::primes_trial(141)) CHECK(d[p * p] == d[p] * d[p] - ipow(static_cast<i128>(p), 11));
}

TEST_CASE("errors and bounds") {
    CHECK_THROWS_AS(delta_coefficients(0), std::invalid_argument);
    CHECK_THROWS_AS(delta_coefficients(kMaxOrder + 1), std::invalid_argument);
    std::vector<i64> huge(10, 2000000000LL);
    CHECK_THROWS_AS(square_i64(huge, 9, false), std::overflow_error);
    CHECK(divisor_count(12) == 6);
    CHECK(divisor_count(1) == 1);
}

TEST_CASE("bias series") {
    const auto& d = table();
    const auto s = tau_bias_series(d, primes::make_grid(16, 20000, 1.1));
    CHECK(std::stod(s.metadata.at("max_abs_normalized_tau")) <= 2.0);
    CHECK(s.column("tau_sum").back() > 0);
    // symmetric square column from tau(p^2) p^{-23/2}
    double direct = 0;
    for (u64 p : oracle::primes_trial(141)) {
        const long double v = static_cast<long double>(d[p * p]) / std::pow(static_cast<long double>(p), 11.5L);
        direct += static_cast<double>(v);
    }
    const auto small = tau_bias_series(d, primes::make_grid_from_points({16, 139}));
    CHECK(small.column("symsq_sum").back() == doctest::Approx(direct).epsilon(1e-12));
    CHECK_THROWS_AS(tau_bias_series(d, primes::make_grid(10, 1000, 2.0)), std::invalid_argument);
    CHECK_THROWS_AS(tau_bias_series(d, primes::make_grid(16, 30000, 2.0)), std::invalid_argument);

    const auto full = delta_coefficients(100000);
    const auto s5 = tau_bias_series(full, primes::make_grid(16, 100000, 1.05));
    CHECK(s5.column("tau_sum").back() > 0);
}

TEST_CASE("binary cache round trip and corruption") {
    const auto path = std::filesystem::temp_directory_path() / ("cbias_tau_" + std::to_string(::getpid()) + ".bin");
    const auto d = delta_coefficients(2000);
    write_cache(path, d);
    CHECK(std::filesystem::file_size(path) == 24 + 16 * 2000);
    const auto back = read_cache(path);
    CHECK(back.N == 2000);
    CHECK(back.tau == d.tau);

    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(100);
        f.put('\x7f');
    }
    CHECK_THROWS_AS(read_cache(path), std::runtime_error);
    std::filesystem::resize_file(path, 50);
    CHECK_THROWS_AS(read_cache(path), std::runtime_error);
    {
        std::ofstream f(path, std::ios::binary);
        f << "NOTATAU0 and more bytes here";
    }
    CHECK_THROWS_AS(read_cache(path), std::runtime_error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_cache(path), std::runtime_error);
}
