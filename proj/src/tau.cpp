#include "cbias/tau.hpp"

#include "cbias/series_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace cbias::tau {

namespace {

std::string i128_string(i128 v) {
    if (v == 0) return "0";
    const bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    std::string s;
    while (u) {
        s += static_cast<char>('0' + static_cast<int>(u % 10));
        u /= 10;
    }
    if (neg) s += '-';
    return {s.rbegin(), s.rend()};
}

template <typename Acc>
void square_into(const std::vector<i64>& a, u64 L, std::vector<Acc>& out, bool parallel) {
    const u64 n_terms = std::min<u64>(L + 1, a.size());
    out.assign(L + 1, 0);
    const auto body = [&](u64 n) {
        Acc s = 0;
        const u64 lo = n + 1 > n_terms ? n + 1 - n_terms : 0;
        for (u64 i = lo; 2 * i < n; ++i) s += static_cast<Acc>(a[i]) * a[n - i];
        s *= 2;
        if (n % 2 == 0 && n / 2 < n_terms) s += static_cast<Acc>(a[n / 2]) * a[n / 2];
        out[n] = s;
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 256)
        for (u64 n = 0; n <= L; ++n) body(n);
    } else {
        for (u64 n = 0; n <= L; ++n) body(n);
    }
}

long double max_abs(const std::vector<i64>& a) {
    long double m = 0;
    for (i64 v : a) m = std::max(m, std::fabs(static_cast<long double>(v)));
    return m;
}

}  // namespace

std::vector<i64> jacobi_series(u64 L) {
    std::vector<i64> a(L + 1, 0);
    for (u64 k = 0;; ++k) {
        const u64 e = k * (k + 1) / 2;
        if (e > L) break;
        a[e] = (k % 2 ? -1 : 1) * static_cast<i64>(2 * k + 1);
    }
    return a;
}

std::vector<i64> square_i64(const std::vector<i64>& a, u64 L, bool parallel) {
    const long double m = max_abs(a);
    if (m * m * static_cast<long double>(L + 1) >= 9.2e18L)
        throw std::overflow_error("64-bit squaring bound exceeded at order " + std::to_string(L));
    std::vector<i64> out;
    square_into(a, L, out, parallel);
    return out;
}

std::vector<i128> square_wide(const std::vector<i64>& a, u64 L, bool parallel) {
    const long double m = max_abs(a);
    if (m * m * static_cast<long double>(L + 1) >= 1.7e38L)
        throw std::overflow_error("128-bit squaring bound exceeded at order " + std::to_string(L));
    std::vector<i128> out;
    square_into(a, L, out, parallel);
    return out;
}

u64 divisor_count(u64 n) {
    u64 c = 0;
    for (u64 d = 1; d * d <= n; ++d)
        if (n % d == 0) c += (d * d == n) ? 1 : 2;
    return c;
}

DeltaExpansion delta_coefficients(u64 N, bool parallel) {
    if (N < 1 || N > kMaxOrder)
        throw std::invalid_argument("delta_coefficients needs 1 <= N <= 2^17, got " + std::to_string(N));
    const u64 L = N - 1;  // Delta = q * A^8
    const auto A = jacobi_series(L);

    // A^2 from the sparse support of A
    std::vector<u64> support;
    for (u64 i = 0; i <= L; ++i)
        if (A[i]) support.push_back(i);
    std::vector<i64> A2(L + 1, 0);
    for (std::size_t x = 0; x < support.size(); ++x)
        for (std::size_t y = 0; y < support.size(); ++y) {
            const u64 e = support[x] + support[y];
            if (e > L) break;
            A2[e] += A[support[x]] * A[support[y]];
        }

    const auto A4 = square_i64(A2, L, parallel);
    const auto A8 = square_wide(A4, L, parallel);

    DeltaExpansion out;
    out.N = N;
    out.tau.assign(N + 1, 0);
    std::vector<u64> d(N + 1, 0);
    for (u64 i = 1; i <= N; ++i)
        for (u64 j = i; j <= N; j += i) ++d[j];
    for (u64 n = 1; n <= N; ++n) {
        out.tau[n] = A8[n - 1];
        const long double bound = 2.0L * d[n] * std::pow(static_cast<long double>(n), 5.5L);
        if (std::fabs(static_cast<long double>(out.tau[n])) >= bound)
            throw OverflowSentinel("tau(" + std::to_string(n) + ") = " + i128_string(out.tau[n]) +
                                   " breaks the Deligne bound; arithmetic overflowed");
    }
    return out;
}

namespace {

class TauAccumulator {
public:
    TauAccumulator(const DeltaExpansion* delta, primes::CheckpointGrid grid)
        : delta_(delta), grid_(std::move(grid)) {}

    void operator()(u64 p) {
        while (next_ < grid_.points.size() && grid_.points[next_] < p) snapshot();
        const auto x = static_cast<long double>(p);
        const long double a = static_cast<long double>(delta_->tau[p]) / std::pow(x, 5.5L);
        max_a_ = std::max(max_a_, std::fabs(static_cast<double>(a)));
        const long double r = 1.0L / std::sqrt(x);
        tau_.add(static_cast<double>(a * r));
        symsq_.add(static_cast<double>((a * a - 1.0L) * r));
    }

    void finish() {
        while (next_ < grid_.points.size()) snapshot();
    }

    std::vector<double> tau_col, symsq_col;
    double max_a_ = 0.0;

private:
    void snapshot() {
        tau_col.push_back(tau_.result());
        symsq_col.push_back(symsq_.result());
        ++next_;
    }
    const DeltaExpansion* delta_;
    primes::CheckpointGrid grid_;
    sums::CompensatedSum tau_, symsq_;
    std::size_t next_ = 0;
};

}  // namespace

sums::CheckpointSeries tau_bias_series(const DeltaExpansion& delta, const primes::CheckpointGrid& grid) {
    if (grid.points.empty() || grid.points.front() < 16 || grid.x_max > delta.N)
        throw std::invalid_argument("tau grid must lie in [16, N] with N = " + std::to_string(delta.N));
    primes::SieveConfig cfg;
    cfg.limit = grid.x_max;
    auto acc = primes::stream_primes(cfg, TauAccumulator(&delta, grid));
    acc.finish();

    sums::CheckpointSeries out;
    out.grid = grid;
    out.add_column("tau_sum", acc.tau_col);
    std::vector<double> pred(grid.points.size()), spred(grid.points.size());
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const double ll = sums::scale_value(sums::Scale::LogLog, static_cast<double>(grid.points[i]));
        pred[i] = 0.5 * ll;
        spred[i] = -0.5 * ll;
    }
    out.add_column("prediction", std::move(pred));
    out = sums::residual_series(out, {{"tau_sum", 1.0}}, 0.5, sums::Scale::LogLog, "", "residual");
    out.add_column("symsq_sum", acc.symsq_col);
    out.add_column("symsq_prediction", std::move(spred));
    out = sums::residual_series(out, {{"symsq_sum", 1.0}}, -0.5, sums::Scale::LogLog, "", "symsq_residual");
    out.metadata["N"] = std::to_string(delta.N);
    std::ostringstream os;
    os.precision(17);
    os << acc.max_a_;
    out.metadata["max_abs_normalized_tau"] = os.str();
    if (acc.max_a_ > 2.0) throw OverflowSentinel("normalized tau(p) outside [-2, 2]");
    return out;
}

namespace {
constexpr char kMagic[8] = {'C', 'B', 'T', 'A', 'U', '0', '0', '1'};

void put_u64(std::string& s, u64 v) {
    for (int i = 0; i < 8; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}
u64 get_u64(const char* p) {
    u64 v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
    return v;
}
}  // namespace

void write_cache(const std::filesystem::path& path, const DeltaExpansion& delta) {
    std::string records;
    records.reserve(16 * delta.N);
    for (u64 n = 1; n <= delta.N; ++n) {
        const auto u = static_cast<unsigned __int128>(delta.tau[n]);
        put_u64(records, static_cast<u64>(u));
        put_u64(records, static_cast<u64>(u >> 64));
    }
    std::string bytes(kMagic, 8);
    put_u64(bytes, delta.N);
    put_u64(bytes, io::fnv1a64(records));
    bytes += records;
    io::write_file(path, bytes);
}

DeltaExpansion read_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read tau cache " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    const std::string bytes = os.str();
    if (bytes.size() < 24 || std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw std::runtime_error("not a tau cache: " + path.string());
    const u64 N = get_u64(bytes.data() + 8);
    const u64 sum = get_u64(bytes.data() + 16);
    if (N > kMaxOrder || bytes.size() != 24 + 16 * N) throw std::runtime_error("truncated tau cache");
    const std::string_view records(bytes.data() + 24, 16 * N);
    if (io::fnv1a64(records) != sum) throw std::runtime_error("tau cache checksum mismatch");
    DeltaExpansion out;
    out.N = N;
    out.tau.assign(N + 1, 0);
    for (u64 n = 1; n <= N; ++n) {
        const char* p = records.data() + 16 * (n - 1);
        const unsigned __int128 u = (static_cast<unsigned __int128>(get_u64(p + 8)) << 64) | get_u64(p);
        out.tau[n] = static_cast<i128>(u);
    }
    return out;
}

}  // namespace cbias::tau
