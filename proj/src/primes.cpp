#include "cbias/primes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace cbias::primes {

void SieveConfig::validate() const {
    if (limit > kMaxLimit)
        throw std::invalid_argument("sieve limit exceeds 2^40: " + std::to_string(limit));
    if (segment_size < 64)
        throw std::invalid_argument("segment_size must be >= 64");
    if (thread_count < 1)
        throw std::invalid_argument("thread_count must be >= 1");
    if (start % segment_span() != 0)
        throw std::invalid_argument("resume start must lie on a segment boundary");
}

u64 isqrt(u64 n) {
    auto r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

std::vector<u64> small_primes(u64 n) {
    std::vector<u64> out;
    if (n < 2) return out;
    std::vector<char> composite(n + 1, 0);
    for (u64 i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        out.push_back(i);
        for (u64 j = i * i; j <= n; j += i) composite[j] = 1;
    }
    return out;
}

std::vector<u64> reference_sieve(u64 limit) {
    return small_primes(limit);
}

namespace {

bool trial_division_prime(u64 n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (u64 d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

// Every prime <= r must be in `base` (sorted ascending).
void check_base_primes(std::span<const u64> base, u64 r) {
    if (r < 2) return;
    u64 top = base.empty() ? 1 : base.back();
    for (u64 n = top + 1; n <= r; ++n) {
        if (trial_division_prime(n))
            throw ContractViolation("base primes insufficient: missing " + std::to_string(n) +
                                    " <= sqrt(hi)");
    }
}

}  // namespace

SegmentBitmap::SegmentBitmap(u64 lo, u64 hi) : lo_(lo), hi_(hi) {
    first_odd_ = std::max<u64>(lo, 3) | 1;
    bit_count_ = hi > first_odd_ ? (hi - first_odd_ + 1) / 2 : 0;
    words_.assign((bit_count_ + 63) / 64, ~u64{0});
    if (bit_count_ % 64 != 0 && !words_.empty())
        words_.back() = (u64{1} << (bit_count_ % 64)) - 1;
}

bool SegmentBitmap::is_prime(u64 n) const {
    if (n < lo_ || n >= hi_) return false;
    if (n == 2) return true;
    if (n % 2 == 0 || n < first_odd_) return false;
    const u64 i = (n - first_odd_) / 2;
    return (words_[i / 64] >> (i % 64)) & 1;
}

u64 SegmentBitmap::count() const {
    u64 c = contains_two() ? 1 : 0;
    for (u64 w : words_) c += std::popcount(w);
    return c;
}

std::vector<u64> SegmentBitmap::primes() const {
    std::vector<u64> out;
    out.reserve(count());
    if (contains_two()) out.push_back(2);
    for (std::size_t k = 0; k < words_.size(); ++k) {
        u64 w = words_[k];
        while (w) {
            const int b = std::countr_zero(w);
            out.push_back(first_odd_ + 2 * (64 * k + b));
            w &= w - 1;
        }
    }
    return out;
}

SegmentBitmap sieve_segment(u64 lo, u64 hi, std::span<const u64> base_primes) {
    if (lo < 2) throw ContractViolation("sieve_segment requires lo >= 2");
    if (hi < lo) throw ContractViolation("sieve_segment requires lo <= hi");
    const u64 r = hi > 1 ? isqrt(hi - 1) : 0;
    check_base_primes(base_primes, r);

    SegmentBitmap seg(lo, hi);
    if (seg.bit_count_ == 0) return seg;
    const u64 first = seg.first_odd_;
    auto* words = seg.words_.data();
    for (u64 p : base_primes) {
        if (p > r) break;
        if (p == 2) continue;
        u64 m = std::max(p * p, (first + p - 1) / p * p);
        if (m % 2 == 0) m += p;
        for (u64 i = (m - first) / 2; i < seg.bit_count_; i += p)
            words[i / 64] &= ~(u64{1} << (i % 64));
    }
    return seg;
}

u64 segment_count(const SieveConfig& config) {
    if (config.limit < 2 || config.start > config.limit) return 0;
    const u64 span = config.segment_span();
    return (config.limit + 1 - config.start + span - 1) / span;
}

std::vector<std::vector<u64>> sieve_batch(const SieveConfig& config,
                                          std::span<const u64> base_primes,
                                          u64 first, u64 count) {
    std::vector<std::vector<u64>> out(count);
    const u64 span = config.segment_span();
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(static, 1) num_threads(config.thread_count)
    for (long long k = 0; k < n; ++k) {
        const u64 index = first + static_cast<u64>(k);
        const u64 lo = std::max<u64>(config.start + index * span, 2);
        const u64 hi = std::min(config.start + (index + 1) * span, config.limit + 1);
        if (lo < hi) out[k] = sieve_segment(lo, hi, base_primes).primes();
    }
    return out;
}

u64 count_primes(const SieveConfig& config) {
    struct Counter {
        u64 n = 0;
        void operator()(u64) { ++n; }
    };
    return stream_primes(config, Counter{}).n;
}

CheckpointGrid make_grid(u64 x_min, u64 x_max, double ratio) {
    if (x_min < 2 || x_min >= x_max)
        throw std::invalid_argument("make_grid requires 2 <= x_min < x_max");
    if (!(ratio > 1.0))
        throw std::invalid_argument("make_grid requires ratio > 1");
    CheckpointGrid grid{x_min, x_max, ratio, {}};
    for (int k = 0;; ++k) {
        const long double v = static_cast<long double>(x_min) * std::pow(static_cast<long double>(ratio), k);
        if (v >= static_cast<long double>(x_max)) break;
        const auto x = static_cast<u64>(std::llround(v));
        if (x >= x_max) break;
        if (grid.points.empty() || x > grid.points.back()) grid.points.push_back(x);
    }
    grid.points.push_back(x_max);
    return grid;
}

CheckpointGrid make_grid_from_points(std::vector<u64> points) {
    if (points.empty()) throw std::invalid_argument("grid must have at least one point");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i] <= points[i - 1])
            throw std::invalid_argument("grid points must be strictly increasing");
    CheckpointGrid grid;
    grid.x_min = points.front();
    grid.x_max = points.back();
    grid.ratio = 0.0;
    grid.points = std::move(points);
    return grid;
}

}  // namespace cbias::primes
