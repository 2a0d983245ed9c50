#pragma once

// Small integer helpers shared by the number-theory modules.

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace cbias::arith {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 powmod(u64 base, u64 exp, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

/// Nonnegative residue of a mod m.
inline i64 mod_floor(i64 a, i64 m) {
    const i64 r = a % m;
    return r < 0 ? r + m : r;
}

/// Prime factorization by trial division: (prime, exponent) pairs, ascending.
inline std::vector<std::pair<u64, unsigned>> factorize(u64 n) {
    std::vector<std::pair<u64, unsigned>> out;
    for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        unsigned k = 0;
        while (n % p == 0) {
            n /= p;
            ++k;
        }
        out.emplace_back(p, k);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

inline bool is_prime_td(u64 n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (u64 d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

inline bool is_squarefree(u64 n) {
    for (const auto& [p, k] : factorize(n))
        if (k > 1) return false;
    return true;
}

inline u64 ipow(u64 b, unsigned e) {
    u64 r = 1;
    while (e--) r *= b;
    return r;
}

}  // namespace cbias::arith
