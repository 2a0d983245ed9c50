#pragma once

/// @file tau.hpp
/// @brief Ramanujan tau(n) from the q-expansion of Delta, and the weighted
/// sums of tau(p)/p^6.

#include "cbias/primes.hpp"
#include "cbias/summation.hpp"

#include <filesystem>
#include <stdexcept>
#include <vector>

namespace cbias::tau {

using i64 = long long;
using i128 = __int128;
using primes::u64;

inline constexpr u64 kMaxOrder = u64{1} << 17;

/// A bound check failed; the message names the offending index.
struct OverflowSentinel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DeltaExpansion {
    u64 N = 0;
    std::vector<i128> tau;  ///< tau[n] for 0 <= n <= N (tau[0] = 0)

    i128 operator[](u64 n) const { return tau.at(n); }
};

/// sum_{k >= 0} (-1)^k (2k+1) q^{k(k+1)/2} up to degree L (Jacobi's eta^3 / q^{1/8}).
std::vector<i64> jacobi_series(u64 L);

/// Square of a series truncated at degree L.
/// 64-bit: std::overflow_error unless max|a|^2 * (L+1) < 2^63.
std::vector<i64> square_i64(const std::vector<i64>& a, u64 L, bool parallel);
/// 64-bit inputs, 128-bit accumulation: overflow check against 2^127.
std::vector<i128> square_wide(const std::vector<i64>& a, u64 L, bool parallel);

/// tau(1..N) via Delta = q * A^8 with A the Jacobi series: A^2 sparse, then two
/// dense squarings (OpenMP over the output index unless parallel = false).
/// std::invalid_argument if N < 1 or N > 2^17. Throws OverflowSentinel if a
/// coefficient breaks |tau(n)| < 2 d(n) n^{11/2}.
DeltaExpansion delta_coefficients(u64 N, bool parallel = true);

/// Number of divisors.
u64 divisor_count(u64 n);

/// Columns tau_sum = sum_{p<=x} tau(p)/p^6, prediction = (1/2) loglog x,
/// residual; symsq_sum = sum (a(p)^2 - 1)/sqrt p with a(p) = tau(p) p^{-11/2},
/// symsq_prediction = -(1/2) loglog x, symsq_residual. grid must lie in [16, N].
sums::CheckpointSeries tau_bias_series(const DeltaExpansion& delta, const primes::CheckpointGrid& grid);

/// Binary cache: "CBTAU001", N (u64 LE), FNV-1a 64 of the records (u64 LE),
/// then tau(1..N) as 16-byte little-endian two's complement records.
void write_cache(const std::filesystem::path& path, const DeltaExpansion& delta);
/// std::runtime_error on a bad magic, truncated file or checksum mismatch.
DeltaExpansion read_cache(const std::filesystem::path& path);

}  // namespace cbias::tau
