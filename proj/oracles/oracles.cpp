#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cbias::oracle {

bool is_prime_trial(u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::vector<u64> primes_trial(u64 limit) {
    std::vector<u64> out;
    for (u64 n = 2; n <= limit; ++n)
        if (is_prime_trial(n)) out.push_back(n);
    return out;
}

std::vector<u64> plain_sieve(u64 limit) {
    std::vector<char> composite(limit + 1, 0);
    std::vector<u64> out;
    for (u64 n = 2; n <= limit; ++n) {
        if (composite[n]) continue;
        out.push_back(n);
        for (u64 m = n * n; m <= limit; m += n) composite[m] = 1;
    }
    return out;
}

std::vector<double> class_sums(u64 q, u64 a, double s, const std::vector<u64>& xs) {
    const auto ps = primes_trial(xs.empty() ? 0 : xs.back());
    std::vector<double> out;
    long double sum = 0;
    std::size_t i = 0;
    for (u64 x : xs) {
        for (; i < ps.size() && ps[i] <= x; ++i)
            if (ps[i] % q == a % q) sum += std::pow(static_cast<long double>(ps[i]), -static_cast<long double>(s));
        out.push_back(static_cast<double>(sum));
    }
    return out;
}

namespace {

// Cohen, Rodriguez Villegas, Zagier: sum_{k>=0} (-1)^k a_k
long double alternating(const std::function<long double(int)>& a, int n) {
    long double d = std::pow(3.0L + std::sqrt(8.0L), n);
    d = (d + 1.0L / d) / 2.0L;
    long double b = -1.0L, c = -d, s = 0.0L;
    for (int k = 0; k < n; ++k) {
        c = b - c;
        s += c * a(k);
        b = static_cast<long double>(k + n) * (k - n) * b / ((k + 0.5L) * (k + 1.0L));
    }
    return s / d;
}

}  // namespace

double zeta_half_alternating() {
    const long double eta = alternating([](int k) { return 1.0L / std::sqrt(static_cast<long double>(k + 1)); }, 36);
    return static_cast<double>(eta / (1.0L - std::sqrt(2.0L)));
}

double l_half_chi4_alternating() {
    return static_cast<double>(
        alternating([](int k) { return 1.0L / std::sqrt(static_cast<long double>(2 * k + 1)); }, 36));
}

double l_half_periodic(const std::vector<int>& values) {
    const u64 q = values.size();
    constexpr int levels = 7;
    constexpr u64 K0 = 1000;
    std::vector<std::vector<long double>> T(levels, std::vector<long double>(levels, 0));
    long double sum = 0;
    u64 n = 1;
    for (int i = 0; i < levels; ++i) {
        const u64 end = (K0 << i) * q;
        for (; n <= end; ++n) {
            const int v = values[n % q];
            if (v) sum += v / std::sqrt(static_cast<long double>(n));
        }
        T[i][0] = sum;
        for (int j = 1; j <= i; ++j) {
            const long double f = std::pow(2.0L, 0.5L + (j - 1));
            T[i][j] = (f * T[i][j - 1] - T[i - 1][j - 1]) / (f - 1.0L);
        }
    }
    return static_cast<double>(T[levels - 1][levels - 1]);
}

double mertens_constant() {
    constexpr u64 P = 10000000;
    long double s = 0.57721566490153286061L;
    for (u64 p : plain_sieve(P)) {
        const long double x = 1.0L / p;
        s += std::log1p(-x) + x;
    }
    s -= 1.0L / (2.0L * P * std::log(static_cast<long double>(P)));
    return static_cast<double>(s);
}

std::vector<i128> tau_pentagonal(u64 N) {
    const u64 L = N - 1;
    std::vector<std::pair<u64, int>> E;  // exponent, sign
    E.push_back({0, 1});
    for (i64 k = 1;; ++k) {
        const u64 e1 = static_cast<u64>(k * (3 * k - 1) / 2), e2 = static_cast<u64>(k * (3 * k + 1) / 2);
        if (e1 > L) break;
        const int sgn = (k % 2) ? -1 : 1;
        E.push_back({e1, sgn});
        if (e2 <= L) E.push_back({e2, sgn});
    }
    std::vector<i128> P(L + 1, 0);
    P[0] = 1;
    for (int rep = 0; rep < 24; ++rep) {
        std::vector<i128> next(L + 1, 0);
        for (u64 n = 0; n <= L; ++n) {
            if (P[n] == 0) continue;
            for (const auto& [e, sgn] : E) {
                if (n + e > L) continue;
                next[n + e] += sgn * P[n];
            }
        }
        P = std::move(next);
    }
    std::vector<i128> tau(N + 1, 0);
    for (u64 n = 1; n <= N; ++n) tau[n] = P[n - 1];
    return tau;
}

u64 sigma11_mod691(u64 n) {
    u64 s = 0;
    for (u64 d = 1; d <= n; ++d) {
        if (n % d) continue;
        u64 p = 1;
        for (int i = 0; i < 11; ++i) p = p * (d % 691) % 691;
        s = (s + p) % 691;
    }
    return s;
}

std::vector<Form> reduced_forms(i64 D) {
    std::vector<Form> out;
    const i64 absD = -D;
    for (i64 a = 1; a * a <= absD; ++a)
        for (i64 b = -a; b <= a; ++b) {
            const i64 num = b * b - D;
            if (num % (4 * a)) continue;
            const i64 c = num / (4 * a);
            if (c < a) continue;
            if (b < 0 && (-b == a || a == c)) continue;
            if (std::gcd(std::gcd(a, std::abs(b)), c) != 1) continue;
            out.emplace_back(a, b, c);
        }
    std::sort(out.begin(), out.end());
    return out;
}

std::set<Form> forms_representing(i64 D, i64 n) {
    std::set<Form> out;
    const i64 absD = -D;
    for (const auto& f : reduced_forms(D)) {
        const auto [a, b, c] = f;
        bool found = false;
        for (i64 y = 0; !found && absD * y * y <= 4 * a * n; ++y) {
            const i64 disc = 4 * a * n - absD * y * y;
            const auto r = static_cast<i64>(std::llround(std::sqrt(static_cast<double>(disc))));
            for (i64 s = std::max<i64>(r - 1, 0); s <= r + 1 && !found; ++s) {
                if (s * s != disc) continue;
                for (i64 num : {-b * y + s, -b * y - s})
                    if (num % (2 * a) == 0) {
                        const i64 x = num / (2 * a);
                        if (a * x * x + b * x * y + c * y * y == n) found = true;
                    }
            }
        }
        if (found) out.insert(f);
    }
    return out;
}

u64 genus_count(i64 D) {
    u64 n = static_cast<u64>(-D), t = 0;
    for (u64 p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        ++t;
        while (n % p == 0) n /= p;
    }
    if (n > 1) ++t;
    return u64{1} << (t - 1);
}

u64 unit_square_index(u64 q) {
    std::vector<char> sq(q, 0);
    u64 units = 0, squares = 0;
    for (u64 y = 1; y < q; ++y) {
        if (std::gcd(y, q) != 1) continue;
        ++units;
        const u64 s = y * y % q;
        if (!sq[s]) {
            sq[s] = 1;
            ++squares;
        }
    }
    return units / squares;
}

namespace {
// remainder of a mod b for monic b, coefficient vectors lowest first
bool divides(const std::vector<unsigned>& b, std::vector<unsigned> a, unsigned q) {
    const std::size_t db = b.size() - 1;
    for (std::size_t k = a.size(); k-- > db;) {
        const unsigned f = a[k];
        if (!f) continue;
        for (std::size_t j = 0; j <= db; ++j) a[k - db + j] = (a[k - db + j] + q * q - f * b[j]) % q;
    }
    return std::all_of(a.begin(), a.end(), [](unsigned x) { return x == 0; });
}

std::vector<unsigned> monic(unsigned q, unsigned d, u64 lower) {
    std::vector<unsigned> c(d + 1);
    for (unsigned k = 0; k < d; ++k) {
        c[k] = static_cast<unsigned>(lower % q);
        lower /= q;
    }
    c[d] = 1;
    return c;
}
}  // namespace

u64 count_irreducibles_brute(unsigned q, unsigned d) {
    u64 total = 1;
    for (unsigned i = 0; i < d; ++i) total *= q;
    u64 count = 0;
    for (u64 idx = 0; idx < total; ++idx) {
        const auto f = monic(q, d, idx);
        bool irreducible = true;
        for (unsigned e = 1; 2 * e <= d && irreducible; ++e) {
            u64 m = 1;
            for (unsigned i = 0; i < e; ++i) m *= q;
            for (u64 g = 0; g < m && irreducible; ++g)
                if (divides(monic(q, e, g), f, q)) irreducible = false;
        }
        if (irreducible) ++count;
    }
    return count;
}

}  // namespace cbias::oracle
