#pragma once

// Brute-force and closed-form reference computations. Deliberately naive and
// independent of the library code paths they are used to check.

#include <cstdint>
#include <functional>
#include <set>
#include <tuple>
#include <vector>

namespace cbias::oracle {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using i128 = __int128;

bool is_prime_trial(u64 n);
/// Primes <= limit by trial division.
std::vector<u64> primes_trial(u64 limit);
/// Plain byte-array sieve over all integers <= limit.
std::vector<u64> plain_sieve(u64 limit);

/// sum_{p <= x, p = a mod q} p^{-s} at each x in `xs` (ascending), over trial-division primes.
std::vector<double> class_sums(u64 q, u64 a, double s, const std::vector<u64>& xs);

/// zeta(1/2) from the alternating eta series with Cohen-Villegas-Zagier acceleration.
double zeta_half_alternating();
/// L(1/2, chi_-4) = sum (-1)^k (2k+1)^{-1/2}, same acceleration.
double l_half_chi4_alternating();
/// L(1/2, chi) for a nonprincipal character given by its values on 0..q-1:
/// partial sums over whole periods, Richardson-extrapolated in K^{-1/2-j}.
double l_half_periodic(const std::vector<int>& values);

/// Mertens' constant from gamma + sum_p (log(1 - 1/p) + 1/p) with a tail estimate.
double mertens_constant();

/// tau(1..N) from q * prod (1 - q^k)^24 via Euler's pentagonal series, 24 sparse products.
std::vector<i128> tau_pentagonal(u64 N);
/// sigma_11(n) mod 691.
u64 sigma11_mod691(u64 n);

using Form = std::tuple<i64, i64, i64>;
/// All reduced primitive forms of discriminant D < 0 by a wide exhaustive search.
std::vector<Form> reduced_forms(i64 D);
/// Reduced forms of discriminant D that represent n.
std::set<Form> forms_representing(i64 D, i64 n);
/// 2^{t-1} with t the number of distinct primes dividing D.
u64 genus_count(i64 D);

/// phi(q) / #{unit squares mod q}.
u64 unit_square_index(u64 q);

/// Number of monic irreducibles of degree d over F_q by trial division of every monic polynomial.
u64 count_irreducibles_brute(unsigned q, unsigned d);

}  // namespace cbias::oracle
