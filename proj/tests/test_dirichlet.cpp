#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "cbias/dirichlet.hpp"

#include <cmath>
#include <numeric>

using namespace cbias;
using namespace cbias::dirichlet;

namespace {
primes::SieveConfig config(u64 limit) {
    primes::SieveConfig c;
    c.limit = limit;
    return c;
}
}  // namespace

TEST_CASE("unit group structure") {
    const UnitGroup g4(4);
    CHECK(g4.generators().size() == 1);
    CHECK(g4.generators()[0].order == 2);
    const UnitGroup g8(8);
    REQUIRE(g8.generators().size() == 2);
    CHECK(g8.generators()[0].order == 2);
    CHECK(g8.generators()[1].order == 2);
    CHECK(UnitGroup(60).phi() == 16);
    CHECK_THROWS_AS(unit_group(2), std::invalid_argument);
    CHECK_THROWS_AS(UnitGroup(1), std::invalid_argument);

    for (u64 q = 3; q <= 300; ++q) {
        const UnitGroup g(q);
        u64 prod = 1;
        for (const auto& gen : g.generators()) prod *= gen.order;
        CHECK(prod == g.phi());
        for (std::size_t i = 0; i < g.generators().size(); ++i) {
            const auto d = g.dlog(g.generators()[i].residue);
            for (std::size_t j = 0; j < d.size(); ++j) CHECK(d[j] == (i == j ? 1u : 0u));
        }
        for (u64 a : g.units()) CHECK(g.element(g.dlog(a)) == a);
    }
}

TEST_CASE("character counts") {
    auto c4 = characters(4);
    CHECK(c4.size() == 2);
    CHECK(c4[0].is_principal());
    CHECK(c4[1].is_real());
    auto c8 = characters(8);
    CHECK(c8.size() == 4);
    for (const auto& c : c8) CHECK(c.is_real());
    auto c7 = characters(7);
    CHECK(c7.size() == 6);
    int real_nontrivial = 0;
    for (const auto& c : c7) real_nontrivial += c.nu();
    CHECK(real_nontrivial == 1);
}

TEST_CASE("orthogonality with exact index arithmetic, q <= 200") {
    for (u64 q = 3; q <= 200; ++q) {
        const auto chars = characters(q);
        const UnitGroup g(q);
        const auto units = g.units();
        REQUIRE(chars.size() == g.phi());
        const u64 N = g.exponent();
        for (std::size_t i = 0; i < chars.size(); ++i)
            for (std::size_t j = i; j < chars.size(); ++j) {
                // sum over units of e((k_i - k_j)/N): count the index histogram
                std::vector<long long> hist(N, 0);
                for (u64 a : units) {
                    const u64 ki = *chars[i].value_index(a), kj = *chars[j].value_index(a);
                    ++hist[(ki + N - kj) % N];
                }
                // orthogonal iff every residue class of the histogram sums to a vanishing combination;
                // here: identical characters give all mass at 0, others give a balanced histogram
                if (i == j) {
                    CHECK(hist[0] == static_cast<long long>(units.size()));
                } else {
                    cplx s = 0;
                    for (u64 k = 0; k < N; ++k) s += static_cast<double>(hist[k]) * root_of_unity(k, N);
                    CHECK(std::abs(s) < 1e-9);
                    // a nontrivial character of a finite group takes each value equally often
                    long long nonzero = 0;
                    for (long long h : hist)
                        if (h) {
                            if (!nonzero) nonzero = h;
                            CHECK(h == nonzero);
                        }
                }
            }
    }
}

TEST_CASE("characters are multiplicative, periodic and vanish off units") {
    for (u64 q : {5ULL, 12ULL, 60ULL, 63ULL, 64ULL, 105ULL})
        for (const auto& chi : characters(q))
            for (u64 a = 0; a < q; ++a) {
                CHECK(std::abs(chi(a) - chi(a + 7 * q)) < 1e-15);
                if (std::gcd(a, q) != 1) CHECK(chi(a) == cplx(0));
                for (u64 b = 1; b < q; b += 5) CHECK(std::abs(chi(a * b) - chi(a) * chi(b)) < 1e-12);
            }
}

TEST_CASE("character labels and parsing") {
    const auto chars = characters(60);
    for (const auto& c : chars) {
        const auto back = parse_character(c.label());
        CHECK(back.exponents() == c.exponents());
        CHECK(back.modulus() == 60);
    }
    CHECK_THROWS_AS(parse_character("60"), std::invalid_argument);
    CHECK_THROWS_AS(parse_character("60:1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_character("4:2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_character("x:1"), std::invalid_argument);
    CHECK(characters(8)[1].conductor() != 1);
    CHECK(parse_character("4:1").conductor() == 4);
}

TEST_CASE("quadratic residues") {
    CHECK(is_quadratic_residue(1, 60));
    CHECK(is_quadratic_residue(49, 60));
    CHECK_FALSE(is_quadratic_residue(7, 60));
    CHECK_FALSE(is_quadratic_residue(3, 4));
    CHECK_THROWS_AS(is_quadratic_residue(6, 60), std::invalid_argument);

    for (u64 q = 3; q <= 10000; ++q) {
        const UnitGroup g(q);
        const unsigned t = t_from_group(g);
        if (q <= 1500) {
            u64 qr = 0;
            for (u64 a : g.units()) qr += is_quadratic_residue(a, q);
            CHECK(qr == g.phi() >> t);
        }
        CHECK((u64{1} << t) == oracle::unit_square_index(q));
        CHECK(t_formula(q) == t);
    }
}

TEST_CASE("t of q") {
    CHECK(t_of_q(4) == 1);
    CHECK(t_of_q(8) == 2);
    CHECK(t_of_q(60) == 3);
    CHECK(t_of_q(3) == 1);
    CHECK(t_of_q(6) == 1);
    CHECK(t_of_q(24) == 3);
}

TEST_CASE("class slope predictions") {
    CHECK(predict_class_slope(4, 1).total == doctest::Approx(0.5));
    CHECK(predict_class_slope(60, 1).total == doctest::Approx(3.5));
    CHECK(predict_class_slope(60, 7).total == doctest::Approx(-0.5));
    CHECK(predict_class_slope(60, 7).m == 0.0);
    CHECK(predict_pair_slope(4, 1, 3) == doctest::Approx(0.5));
    CHECK(predict_pair_slope(8, 1, 3) == doctest::Approx(0.5));
    CHECK(predict_pair_slope(8, 3, 5) == doctest::Approx(0.0));
    CHECK_THROWS_AS(predict_class_slope(60, 6), std::invalid_argument);

    for (u64 q = 3; q <= 200; ++q) {
        double sum = 0;
        for (const auto& [a, p] : predict_all_class_slopes(q, false)) {
            sum += p.M;
            const unsigned t = t_of_q(q);
            CHECK(p.M == doctest::Approx(is_quadratic_residue(a, q) ? ((1 << t) - 1) / 2.0 : -0.5));
        }
        CHECK(std::fabs(sum) < 1e-9);
    }
}

TEST_CASE("Hurwitz zeta") {
    CHECK(std::fabs(hurwitz_zeta(0.5, 1.0) - oracle::zeta_half_alternating()) < 1e-12);
    CHECK(std::fabs(hurwitz_zeta(0.5, 1.0) - (-1.4603545088)) < 1e-10);
    CHECK(std::fabs(hurwitz_zeta(0.5, 0.5) - (std::sqrt(2.0) - 1.0) * hurwitz_zeta(0.5, 1.0)) < 1e-10);
    const double diff = hurwitz_zeta(0.5, 0.25) - hurwitz_zeta(0.5, 0.75);
    CHECK(std::fabs(diff - 2.0 * oracle::l_half_chi4_alternating()) < 1e-10);
    CHECK_THROWS_AS(hurwitz_zeta(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(hurwitz_zeta(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(hurwitz_zeta(0.5, 1.5), std::invalid_argument);
}

TEST_CASE("central values") {
    auto chi4 = characters(4)[1];
    const auto l4 = l_half(chi4);
    CHECK(std::fabs(l4.real() - 0.667691457) < 1e-9);
    CHECK(std::fabs(l4.real() - oracle::l_half_chi4_alternating()) < 1e-9);
    CHECK(chi4.m() == 0);

    for (auto chi : characters(8))
        if (!chi.is_principal() && chi.conductor() == 8) {
            const auto v = l_half(chi);
            CHECK(v.real() > 0);
            CHECK(std::fabs(v.imag()) < 1e-12);
        }

    auto principal = characters(5)[0];
    CHECK_THROWS_AS(l_half(principal), std::invalid_argument);
}

TEST_CASE("partial Euler products") {
    const auto grid = primes::make_grid(16, 1000000, 1.2);
    const auto chi4 = characters(4)[1];
    const auto s = partial_euler_product(chi4, grid, config(1000000));
    const double target = s.column("target_re")[0];
    CHECK(target == doctest::Approx(std::sqrt(2.0) * 0.667691457189609).epsilon(1e-12));
    CHECK(std::fabs(s.column("product_re").back() - target) < 0.1);

    // x below the first prime: empty product
    const auto early = partial_euler_product(chi4, primes::make_grid_from_points({1}), config(2));
    CHECK(early.column("product_re")[0] == 1.0);
    CHECK(early.column("product_im")[0] == 0.0);

    // log expansion pieces reassemble the log of the product
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double pieces = s.column("sum_k1_re")[i] + s.column("sum_k2_re")[i] + s.column("sum_k3plus_re")[i];
        CHECK(std::fabs(pieces - s.column("log_product_re")[i]) < 1e-10);
        CHECK(std::fabs(std::exp(pieces) - s.column("product_re")[i]) < 1e-10 * s.column("product_re")[i]);
    }

    // complex character mod 7: no sqrt 2 factor
    const auto chars7 = characters(7);
    const auto& c7 = chars7[1];
    REQUIRE_FALSE(c7.is_real());
    const auto e7 = partial_euler_product(c7, grid, config(1000000));
    const auto l7 = central_value(c7);
    CHECK(e7.column("target_re")[0] == doctest::Approx(l7.real()));
    CHECK(e7.column("target_im")[0] == doctest::Approx(l7.imag()));
}

TEST_CASE("DRH residual against the class difference") {
    const auto grid = primes::make_grid(16, 1000000, 1.2);
    const auto chi4 = characters(4)[1];
    const auto drh = drh_residual(chi4, grid, config(1000000));
    const auto cls = sums::accumulate_series(residue_classifier(4), 0.5, grid, config(1000000));
    // residual + pi(x;4,3) - pi(x;4,1) - (1/2) loglog x is identically 0
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const double ll = std::log(std::log(static_cast<double>(grid.points[i])));
        const double via_classes = cls.column("class:1")[i] - cls.column("class:3")[i] + 0.5 * ll;
        CHECK(std::fabs(drh.column("residual_re")[i] - via_classes) < 1e-10);
    }
    const auto big = drh_residual(chi4, primes::make_grid(10000, 100000000, 1.05), config(100000000));
    CHECK(sums::column_range(big, "residual_re", 10000, 100000000) < 1.0);

    const auto chars7 = characters(7);
    const auto r7 = drh_residual(chars7[1], primes::make_grid(10000, 10000000, 1.1), config(10000000));
    CHECK(sums::column_range(r7, "residual_re", 10000, 10000000) < 1.0);
    CHECK(sums::column_range(r7, "residual_im", 10000, 10000000) < 1.0);
}

TEST_CASE("residue and coset classifiers") {
    const auto c = residue_classifier(60);
    CHECK(c.labels.size() == 16);
    CHECK(c.classify(2) == sums::kExcluded);
    CHECK(c.classify(5) == sums::kExcluded);
    CHECK(c.labels[c.classify(61)] == "1");

    const auto k = coset_classifier(7, {6});
    CHECK(k.labels == std::vector<std::string>{"1", "2", "3"});
    CHECK(k.classify(7) == sums::kExcluded);
    CHECK(k.labels[k.classify(13)] == "1");  // 13 = -1 mod 7
    for (double d : k.expected_density) CHECK(d == doctest::Approx(1.0 / 3));
    for (double s : coset_slopes(7, {6})) CHECK(s == doctest::Approx(0.0));
    CHECK_THROWS_AS(coset_classifier(7, {7}), std::invalid_argument);
}
